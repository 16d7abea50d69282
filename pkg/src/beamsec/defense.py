"""Iterative adversarial training and robustness evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import numcore
from .attack import AttackConfig, attack_dataset


@dataclass(frozen=True)
class DefenseConfig:
    epsilon: float = 0.1
    max_rounds: int = 10
    steady_state_rel_tol: float = 0.01
    augment_fraction: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("defense epsilon must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.steady_state_rel_tol <= 0:
            raise ValueError("steady_state_rel_tol must be positive")
        if not 0.0 < self.augment_fraction <= 1.0:
            raise ValueError("augment_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class RoundRecord:
    """Metrics after one training round, measured on the fixed plateau subset."""

    round_index: int
    clean_mse: float
    adv_mse: float
    dataset_rows: int


@dataclass
class _Pool:
    features: np.ndarray
    labels: np.ndarray


def _subset_metrics(model, X, y, atk):
    clean = numcore.mse_loss(numcore.predict(model, X), y)
    x_adv = attack_dataset(model, _Pool(X, y), atk)
    adv = numcore.mse_loss(numcore.predict(model, x_adv), y)
    return clean, adv


def adversarial_train(
    base,
    train_cfg: numcore.TrainConfig,
    def_cfg: DefenseConfig,
    rng,
) -> Tuple[numcore.MlpModel, List[RoundRecord]]:
    """Clean training round followed by FGSM-augmented fine-tuning rounds.

    Round 0 trains from scratch on the clean rows exactly like plain train().
    Each later round generates fresh FGSM examples against the current model
    for a shuffled augment_fraction slice of the base rows, appends them to
    the growing pool (clean rows are kept), and fine-tunes the current
    weights. Rounds stop at max_rounds or when the adversarial MSE on a fixed
    10% subset improves by less than steady_state_rel_tol relative.
    """
    X = np.asarray(base.features, dtype=np.float64)
    y = np.asarray(base.labels, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("base dataset must be a nonempty (n, d) matrix")
    n = X.shape[0]

    model_seed = int(rng.integers(0, 2**63))
    model = numcore.init_model(X.shape[1], model_seed)
    model, _ = numcore.train(model, base, train_cfg, rng)

    atk = AttackConfig(epsilon=def_cfg.epsilon)
    probe = rng.permutation(n)[: max(1, math.ceil(0.1 * n))]
    clean0, adv0 = _subset_metrics(model, X[probe], y[probe], atk)
    history = [RoundRecord(0, clean0, adv0, n)]

    pool_X, pool_y = [X], [y]
    rows = n
    aug_count = math.ceil(def_cfg.augment_fraction * n)
    prev_adv = adv0
    for round_index in range(1, def_cfg.max_rounds):
        pick = rng.permutation(n)[:aug_count]
        x_adv = attack_dataset(model, _Pool(X[pick], y[pick]), atk)
        pool_X.append(x_adv)
        pool_y.append(y[pick])
        rows += aug_count
        pool = _Pool(np.concatenate(pool_X), np.concatenate(pool_y))
        model, _ = numcore.train(model, pool, train_cfg, rng)
        clean, adv = _subset_metrics(model, X[probe], y[probe], atk)
        history.append(RoundRecord(round_index, clean, adv, rows))
        improvement = (prev_adv - adv) / prev_adv if prev_adv > 0 else 0.0
        if improvement < def_cfg.steady_state_rel_tol:
            break
        prev_adv = adv
    return model, history


def evaluate_robustness(model, test, eps_grid: Sequence[float]) -> Dict[float, float]:
    """Test MSE under FGSM at each budget; epsilon 0 means the clean MSE."""
    if len(eps_grid) == 0:
        raise ValueError("eps_grid must be nonempty")
    X = np.asarray(test.features, dtype=np.float64)
    y = np.asarray(test.labels, dtype=np.float64)
    out: Dict[float, float] = {}
    for eps in eps_grid:
        eps = float(eps)
        if eps < 0:
            raise ValueError("epsilon must be nonnegative")
        if eps == 0.0:
            preds = numcore.predict(model, X)
        else:
            x_adv = attack_dataset(model, _Pool(X, y), AttackConfig(epsilon=eps))
            preds = numcore.predict(model, x_adv)
        out[eps] = numcore.mse_loss(preds, y)
    return out


def round_history_to_csv(history: Sequence[RoundRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("round,clean_mse,adv_mse,dataset_rows\n")
        for rec in history:
            fh.write(
                f"{rec.round_index},{rec.clean_mse:.12g},{rec.adv_mse:.12g},{rec.dataset_rows}\n"
            )
