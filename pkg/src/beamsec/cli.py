"""Command-line entry points for dataset generation, training, attacks, and sweeps.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from functools import wraps
from pathlib import Path

import click
import numpy as np

from . import harness, numcore
from .attack import AttackConfig, attack_dataset
from .channel import Dataset, build_dataset, load_dataset
from .defense import adversarial_train, round_history_to_csv
from .harness import ConfigError, load_config


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(3)
        except numcore.NumericalError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(4)
        except ValueError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
def main():
    """Beam-rate prediction pipeline: datasets, models, attacks, defenses, sweeps."""


@main.command()
@click.option("--config", type=click.Path(), default=None, help="JSON experiment config.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--instances", type=int, default=None, help="Override the instance count.")
@click.option("--out", type=click.Path(), required=True, help="Output dataset file.")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="Also export CSV here.")
@_guarded
def generate(config, seed, instances, out, csv_path):
    """Simulate a dataset and write it as a binary dataset file."""
    cfg = load_config(config)
    params = cfg.scenario if seed is None else replace(cfg.scenario, seed=seed)
    count = instances if instances is not None else cfg.num_instances
    ds = build_dataset(params, count)
    ds.save(out)
    if csv_path:
        ds.to_csv(csv_path)
    click.echo(f"wrote {ds.num_rows} instances x {ds.num_features} features to {out}")


@main.command()
@click.option("--config", type=click.Path(), default=None, help="JSON experiment config.")
@click.option("--data", type=click.Path(), required=True, help="Training dataset file.")
@click.option("--seed", type=int, default=1, help="Seed for init and shuffling.")
@click.option("--out", type=click.Path(), required=True, help="Output model checkpoint.")
@_guarded
def train(config, data, seed, out):
    """Train the predictor on a dataset and save a checkpoint."""
    cfg = load_config(config)
    ds = load_dataset(data)
    rng = np.random.default_rng(seed)
    model = numcore.init_model(ds.num_features, int(rng.integers(0, 2**63)))
    _, history = numcore.train(model, ds, cfg.train, rng)
    numcore.save_model(model, out)
    click.echo(f"trained {cfg.train.epochs} epochs; final train MSE {history[-1]:.6g}")
    click.echo(f"saved checkpoint to {out}")


@main.command()
@click.option("--model", "model_path", type=click.Path(), required=True, help="Model checkpoint.")
@click.option("--data", type=click.Path(), required=True, help="Dataset to perturb.")
@click.option("--eps", type=float, required=True, help="l-infinity budget.")
@click.option("--out", type=click.Path(), required=True, help="Output perturbed dataset file.")
@_guarded
def attack(model_path, data, eps, out):
    """Write an FGSM-perturbed copy of a dataset."""
    model = numcore.load_model(model_path)
    ds = load_dataset(data)
    x_adv = attack_dataset(model, ds, AttackConfig(epsilon=eps))
    adv_ds = Dataset(
        features=x_adv,
        labels=ds.labels,
        norm_meta=ds.norm_meta,
        scenario=ds.scenario,
        adversarial=True,
        epsilon=float(eps),
    )
    adv_ds.save(out)
    clean = numcore.mse_loss(numcore.predict(model, ds.features), ds.labels)
    attacked = numcore.mse_loss(numcore.predict(model, x_adv), ds.labels)
    click.echo(f"clean MSE {clean:.6g} -> attacked MSE {attacked:.6g} at eps={eps:g}")


@main.command()
@click.option("--config", type=click.Path(), default=None, help="JSON experiment config.")
@click.option("--data", type=click.Path(), required=True, help="Training dataset file.")
@click.option("--seed", type=int, default=1, help="Seed for the defense run.")
@click.option("--out", type=click.Path(), required=True, help="Output model checkpoint.")
@click.option("--history", "history_path", type=click.Path(), default=None, help="Round history CSV.")
@_guarded
def defend(config, data, seed, out, history_path):
    """Adversarially train a predictor and save the robust checkpoint."""
    cfg = load_config(config)
    ds = load_dataset(data)
    rng = np.random.default_rng(seed)
    model, history = adversarial_train(ds, cfg.train, cfg.defense, rng)
    numcore.save_model(model, out)
    if history_path:
        round_history_to_csv(history, history_path)
    last = history[-1]
    click.echo(
        f"{len(history)} rounds; final clean MSE {last.clean_mse:.6g}, "
        f"adversarial MSE {last.adv_mse:.6g}"
    )


@main.command()
@click.option("--config", type=click.Path(), default=None, help="JSON experiment config.")
@click.option("--seed", type=int, default=None, help="Override base_seed.")
@click.option("--reps", type=int, default=None, help="Override repetition count.")
@click.option("--eps", type=str, default=None, help="Comma-separated attack budgets.")
@click.option("--out", type=click.Path(), default=None, help="Override output directory.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json"]),
    default="csv",
    help="Report format.",
)
@_guarded
def run(config, seed, reps, eps, out, fmt):
    """Run the full scenario sweep and write results plus a summary report."""
    cfg = load_config(config)
    overrides = {}
    if seed is not None:
        overrides["base_seed"] = seed
    if reps is not None:
        overrides["repetitions"] = reps
    if out is not None:
        overrides["output_dir"] = out
    if eps is not None:
        try:
            overrides["attack_grid"] = tuple(float(v) for v in eps.split(",") if v)
        except ValueError:
            raise ConfigError(f"--eps must be a comma-separated float list, got {eps!r}")
    if overrides:
        try:
            cfg = replace(cfg, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc))
    result = harness.run_experiment(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.to_csv(out_dir / "results.csv")
    result.timings_to_csv(out_dir / "timings.csv")
    summary = harness.summarize(result)
    written = harness.emit_report(summary, out_dir, fmt)
    click.echo(f"wrote {out_dir / 'results.csv'}")
    for path in written:
        click.echo(f"wrote {path}")
    for row in summary.rows:
        click.echo(
            f"{row.scenario_id} eps={row.epsilon:.6g}: mean MSE {row.mean_mse:.6g} "
            f"(n={row.n})"
        )


@main.command()
@click.option("--results", type=click.Path(), required=True, help="results.csv from a run.")
@click.option("--out", type=click.Path(), required=True, help="Output directory.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json"]),
    default="csv",
    help="Report format.",
)
@_guarded
def report(results, out, fmt):
    """Summarize an existing results table into a report."""
    result = harness.ExperimentResult.from_csv(results)
    summary = harness.summarize(result)
    written = harness.emit_report(summary, out, fmt)
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
