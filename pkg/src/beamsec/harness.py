"""Experiment orchestration: clean, attacked, and defended scenario sweeps.

Scenario ids: SC1 is the clean test MSE of the undefended model, SC2 its MSE
under FGSM at each budget in the attack grid, SC3 the adversarially trained
model's MSE under the same attacks. Every repetition r is fully determined by
base_seed + r, so results are reproducible byte for byte.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import numcore
from .attack import AttackConfig, attack_dataset
from .channel import (
    ScenarioParams,
    build_dataset,
    default_scenario,
    scenario_from_dict,
    scenario_to_dict,
    split_dataset,
)
from .defense import DefenseConfig, adversarial_train

SC1 = "SC1"
SC2 = "SC2"
SC3 = "SC3"

DEFAULT_ATTACK_GRID = tuple(round(0.01 * i, 2) for i in range(1, 11))

SUMMARY_HEADER = "scenario,epsilon,mean_mse,std_mse,min_mse,max_mse,n"

_SEED_SALT = 0xB5EC  # keeps harness child streams apart from dataset streams


class ConfigError(ValueError):
    """Invalid or unknown configuration field; message carries the field path."""


@dataclass
class ExperimentConfig:
    scenario: ScenarioParams = field(default_factory=default_scenario)
    train: numcore.TrainConfig = field(default_factory=numcore.TrainConfig)
    defense: DefenseConfig = field(default_factory=DefenseConfig)
    attack_grid: Tuple[float, ...] = DEFAULT_ATTACK_GRID
    repetitions: int = 20
    base_seed: int = 1
    num_instances: int = 12500
    train_fraction: float = 0.8
    output_dir: str = "results"

    def __post_init__(self):
        if len(self.attack_grid) == 0:
            raise ValueError("attack_grid must be nonempty")
        if any(e <= 0 for e in self.attack_grid):
            raise ValueError("attack_grid budgets must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be nonnegative")
        if self.num_instances < 2:
            raise ValueError("num_instances must be at least 2")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class ResultRow:
    scenario_id: str
    epsilon: float
    repetition: int
    mse: float
    wall_time_s: float


@dataclass
class ExperimentResult:
    rows: List[ResultRow]

    def to_csv(self, path) -> None:
        """Deterministic result table; wall times go to timings_to_csv instead."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("scenario,epsilon,repetition,mse\n")
            for r in self.rows:
                fh.write(f"{r.scenario_id},{r.epsilon:.6g},{r.repetition},{r.mse:.12g}\n")

    def timings_to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("scenario,epsilon,repetition,wall_time_s\n")
            for r in self.rows:
                fh.write(
                    f"{r.scenario_id},{r.epsilon:.6g},{r.repetition},{r.wall_time_s:.6g}\n"
                )

    @staticmethod
    def from_csv(path) -> "ExperimentResult":
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "scenario,epsilon,repetition,mse":
                raise ValueError(f"unexpected results header: {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                sc, eps, rep, mse = line.split(",")
                rows.append(ResultRow(sc, float(eps), int(rep), float(mse), 0.0))
        return ExperimentResult(rows=rows)


def _worker_count(repetitions: int) -> int:
    raw = os.environ.get("BEAMSEC_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"BEAMSEC_THREADS must be an integer, got {raw!r}")
    return max(1, min(cap, repetitions))


def _run_repetition(cfg: ExperimentConfig, repetition: int) -> List[ResultRow]:
    seed = cfg.base_seed + repetition
    params = replace(cfg.scenario, seed=seed)
    rows: List[ResultRow] = []

    t0 = time.perf_counter()
    dataset = build_dataset(params, cfg.num_instances)
    streams = np.random.SeedSequence([seed, _SEED_SALT]).spawn(3)
    split_rng, train_rng, defense_rng = (np.random.default_rng(s) for s in streams)
    train_ds, test_ds = split_dataset(dataset, cfg.train_fraction, split_rng)

    model_seed = int(train_rng.integers(0, 2**63))
    model = numcore.init_model(train_ds.num_features, model_seed)
    numcore.train(model, train_ds, cfg.train, train_rng)
    clean_mse = numcore.mse_loss(numcore.predict(model, test_ds.features), test_ds.labels)
    rows.append(ResultRow(SC1, 0.0, repetition, clean_mse, time.perf_counter() - t0))

    for eps in cfg.attack_grid:
        t0 = time.perf_counter()
        x_adv = attack_dataset(model, test_ds, AttackConfig(epsilon=float(eps)))
        mse = numcore.mse_loss(numcore.predict(model, x_adv), test_ds.labels)
        rows.append(ResultRow(SC2, float(eps), repetition, mse, time.perf_counter() - t0))

    t0 = time.perf_counter()
    robust, _history = adversarial_train(train_ds, cfg.train, cfg.defense, defense_rng)
    setup = time.perf_counter() - t0
    for i, eps in enumerate(cfg.attack_grid):
        t0 = time.perf_counter()
        x_adv = attack_dataset(robust, test_ds, AttackConfig(epsilon=float(eps)))
        mse = numcore.mse_loss(numcore.predict(robust, x_adv), test_ds.labels)
        elapsed = time.perf_counter() - t0 + (setup if i == 0 else 0.0)
        rows.append(ResultRow(SC3, float(eps), repetition, mse, elapsed))
    return rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All repetitions of SC1/SC2/SC3; deterministic row order and values.

    Repetitions are independent given their seeds; BEAMSEC_THREADS > 1 runs
    them in a process pool. Rows come back sorted by (scenario, epsilon,
    repetition) either way.
    """
    workers = _worker_count(cfg.repetitions)
    reps = range(cfg.repetitions)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_repetition, [cfg] * cfg.repetitions, reps))
    else:
        chunks = [_run_repetition(cfg, r) for r in reps]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r.scenario_id, r.epsilon, r.repetition))
    if any(not np.isfinite(r.mse) for r in rows):
        raise numcore.NumericalError("experiment produced a non-finite MSE")
    return ExperimentResult(rows=rows)


@dataclass(frozen=True)
class SummaryRow:
    scenario_id: str
    epsilon: float
    mean_mse: float
    std_mse: float
    min_mse: float
    max_mse: float
    n: int


@dataclass
class Summary:
    rows: List[SummaryRow]
    ratios: Dict[str, Dict[float, float]]


def summarize(result: ExperimentResult) -> Summary:
    """Per (scenario, epsilon) aggregates plus attacked/clean mean-MSE ratios."""
    if not result.rows:
        raise ValueError("cannot summarize an empty result")
    groups: Dict[Tuple[str, float], List[float]] = {}
    for row in result.rows:
        groups.setdefault((row.scenario_id, row.epsilon), []).append(row.mse)
    rows = []
    for (sc, eps), values in sorted(groups.items()):
        arr = np.asarray(values, dtype=np.float64)
        rows.append(
            SummaryRow(
                scenario_id=sc,
                epsilon=eps,
                mean_mse=float(arr.mean()),
                std_mse=float(arr.std()),  # population std
                min_mse=float(arr.min()),
                max_mse=float(arr.max()),
                n=int(arr.size),
            )
        )
    ratios: Dict[str, Dict[float, float]] = {}
    clean = [r for r in rows if r.scenario_id == SC1]
    if clean and clean[0].mean_mse > 0:
        base = clean[0].mean_mse
        for sc in (SC2, SC3):
            table = {
                r.epsilon: r.mean_mse / base for r in rows if r.scenario_id == sc
            }
            if table:
                ratios[f"{sc}_over_{SC1}"] = table
    return Summary(rows=rows, ratios=ratios)


def _sig6(value: float) -> float:
    return float(f"{value:.6g}")


def emit_report(summary: Summary, out_dir, fmt: str = "csv") -> List[Path]:
    """Write the summary in the requested format; returns the paths written.

    CSV: summary.csv (fixed header) plus ratios.csv. JSON: summary.json with
    the same rows and the ratio tables; floats carry 6 significant digits.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format: {fmt!r}")
    if not summary.rows:
        raise ValueError("cannot emit an empty summary")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        path = out_dir / "summary.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(SUMMARY_HEADER + "\n")
            for r in summary.rows:
                fh.write(
                    f"{r.scenario_id},{r.epsilon:.6g},{r.mean_mse:.6g},{r.std_mse:.6g},"
                    f"{r.min_mse:.6g},{r.max_mse:.6g},{r.n}\n"
                )
        written.append(path)
        rpath = out_dir / "ratios.csv"
        with open(rpath, "w", encoding="utf-8") as fh:
            fh.write("scenario,epsilon,mse_ratio_vs_clean\n")
            for key in sorted(summary.ratios):
                sc = key.split("_over_")[0]
                for eps in sorted(summary.ratios[key]):
                    fh.write(f"{sc},{eps:.6g},{summary.ratios[key][eps]:.6g}\n")
        written.append(rpath)
    else:
        payload = {
            "rows": [
                {
                    "scenario": r.scenario_id,
                    "epsilon": _sig6(r.epsilon),
                    "mean_mse": _sig6(r.mean_mse),
                    "std_mse": _sig6(r.std_mse),
                    "min_mse": _sig6(r.min_mse),
                    "max_mse": _sig6(r.max_mse),
                    "n": r.n,
                }
                for r in summary.rows
            ],
            "ratios": {
                key: {f"{eps:.6g}": _sig6(v) for eps, v in sorted(table.items())}
                for key, table in sorted(summary.ratios.items())
            },
        }
        path = out_dir / "summary.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    return written


def summary_from_json(path) -> Summary:
    """Inverse of the JSON report, up to the 6-digit float rendering."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = [
        SummaryRow(
            scenario_id=str(r["scenario"]),
            epsilon=float(r["epsilon"]),
            mean_mse=float(r["mean_mse"]),
            std_mse=float(r["std_mse"]),
            min_mse=float(r["min_mse"]),
            max_mse=float(r["max_mse"]),
            n=int(r["n"]),
        )
        for r in payload["rows"]
    ]
    ratios = {
        key: {float(eps): float(v) for eps, v in table.items()}
        for key, table in payload.get("ratios", {}).items()
    }
    return Summary(rows=rows, ratios=ratios)


def _coerce(value, kind, path):
    try:
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {value!r}")
    return value


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build a validated config from a plain JSON document; all fields optional."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    known = {
        "scenario",
        "train",
        "defense",
        "attack_grid",
        "repetitions",
        "base_seed",
        "num_instances",
        "train_fraction",
        "output_dir",
    }
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown config field: {key}")

    scenario = default_scenario()
    if "scenario" in doc:
        section = doc["scenario"]
        if not isinstance(section, dict):
            raise ConfigError("scenario: expected an object")
        base = scenario_to_dict(scenario)
        for key in section:
            if key not in base:
                raise ConfigError(f"unknown config field: scenario.{key}")
        base.update(section)
        try:
            scenario = scenario_from_dict(base)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"scenario: {exc}")

    train_cfg = numcore.TrainConfig()
    if "train" in doc:
        section = doc["train"]
        if not isinstance(section, dict):
            raise ConfigError("train: expected an object")
        fields = set(numcore.TrainConfig.__dataclass_fields__)
        for key in section:
            if key not in fields:
                raise ConfigError(f"unknown config field: train.{key}")
        try:
            train_cfg = numcore.TrainConfig(**section)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"train: {exc}")

    defense_cfg = DefenseConfig()
    if "defense" in doc:
        section = doc["defense"]
        if not isinstance(section, dict):
            raise ConfigError("defense: expected an object")
        fields = set(DefenseConfig.__dataclass_fields__)
        for key in section:
            if key not in fields:
                raise ConfigError(f"unknown config field: defense.{key}")
        try:
            defense_cfg = DefenseConfig(**section)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"defense: {exc}")

    grid = DEFAULT_ATTACK_GRID
    if "attack_grid" in doc:
        raw = doc["attack_grid"]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError("attack_grid: expected a nonempty list of budgets")
        grid = tuple(_coerce(v, float, f"attack_grid[{i}]") for i, v in enumerate(raw))

    kwargs = dict(
        scenario=scenario,
        train=train_cfg,
        defense=defense_cfg,
        attack_grid=grid,
    )
    for name, kind in (
        ("repetitions", int),
        ("base_seed", int),
        ("num_instances", int),
        ("train_fraction", float),
    ):
        if name in doc:
            kwargs[name] = _coerce(doc[name], kind, name)
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str):
            raise ConfigError("output_dir: expected a string")
        kwargs["output_dir"] = doc["output_dir"]
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "scenario": scenario_to_dict(cfg.scenario),
        "train": {k: getattr(cfg.train, k) for k in numcore.TrainConfig.__dataclass_fields__},
        "defense": {k: getattr(cfg.defense, k) for k in DefenseConfig.__dataclass_fields__},
        "attack_grid": list(cfg.attack_grid),
        "repetitions": cfg.repetitions,
        "base_seed": cfg.base_seed,
        "num_instances": cfg.num_instances,
        "train_fraction": cfg.train_fraction,
        "output_dir": cfg.output_dir,
    }


def load_config(path=None) -> ExperimentConfig:
    """Read a JSON config file; None gives the all-defaults experiment."""
    if path is None:
        return ExperimentConfig()
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
    return config_from_dict(doc)
