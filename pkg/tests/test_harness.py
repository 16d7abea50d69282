"""Experiment orchestration tests: sweeps, summaries, reports, configuration."""

from __future__ import annotations

import json
from dataclasses import replace

import numpy as np
import pytest

from beamsec import harness, numcore
from beamsec.channel import UserGrid, Wall
from beamsec.defense import DefenseConfig
from beamsec.harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    ResultRow,
    Summary,
    SummaryRow,
    config_from_dict,
    config_to_dict,
    emit_report,
    load_config,
    run_experiment,
    summarize,
    summary_from_json,
)


def tiny_config(tiny_scenario, **kw) -> ExperimentConfig:
    base = dict(
        scenario=tiny_scenario,
        train=numcore.TrainConfig(epochs=2),
        defense=DefenseConfig(epsilon=0.1, max_rounds=2),
        attack_grid=(0.1,),
        repetitions=1,
        num_instances=300,
    )
    base.update(kw)
    return ExperimentConfig(**base)


# ------------------------------------------------------------ run_experiment


def test_row_counts_single_rep(tiny_scenario):
    result = run_experiment(tiny_config(tiny_scenario))
    by_scenario = {}
    for row in result.rows:
        by_scenario.setdefault(row.scenario_id, []).append(row)
    assert len(by_scenario["SC1"]) == 1
    assert len(by_scenario["SC2"]) == 1
    assert len(by_scenario["SC3"]) == 1
    assert all(r.epsilon == 0.0 for r in by_scenario["SC1"])
    assert all(np.isfinite(r.mse) and r.mse >= 0.0 for r in result.rows)


def test_row_counts_multi_rep(tiny_scenario):
    cfg = tiny_config(tiny_scenario, repetitions=2, attack_grid=(0.02, 0.05, 0.1))
    result = run_experiment(cfg)
    assert len([r for r in result.rows if r.scenario_id == "SC1"]) == 2
    assert len([r for r in result.rows if r.scenario_id == "SC2"]) == 6
    assert len([r for r in result.rows if r.scenario_id == "SC3"]) == 6
    triples = [(r.scenario_id, r.epsilon, r.repetition) for r in result.rows]
    assert len(triples) == len(set(triples))
    assert triples == sorted(triples)  # deterministic row order


def test_run_experiment_is_deterministic(tiny_scenario, tmp_path):
    cfg = tiny_config(tiny_scenario)
    r1 = run_experiment(cfg)
    r2 = run_experiment(cfg)
    key = lambda r: (r.scenario_id, r.epsilon, r.repetition, r.mse)
    assert [key(r) for r in r1.rows] == [key(r) for r in r2.rows]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    r1.to_csv(p1)
    r2.to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_worker_pool_matches_serial(tiny_scenario, monkeypatch):
    cfg = tiny_config(tiny_scenario, repetitions=2)
    serial = run_experiment(cfg)
    monkeypatch.setenv("BEAMSEC_THREADS", "2")
    pooled = run_experiment(cfg)
    key = lambda r: (r.scenario_id, r.epsilon, r.repetition, r.mse)
    assert [key(r) for r in serial.rows] == [key(r) for r in pooled.rows]


def test_worker_count_env_validation(monkeypatch):
    monkeypatch.setenv("BEAMSEC_THREADS", "not-a-number")
    with pytest.raises(ConfigError):
        harness._worker_count(4)
    monkeypatch.setenv("BEAMSEC_THREADS", "8")
    assert harness._worker_count(3) == 3
    monkeypatch.setenv("BEAMSEC_THREADS", "2")
    assert harness._worker_count(10) == 2


def test_sc2_converges_to_sc1_as_epsilon_vanishes(tiny_trained):
    """The attacked MSE approaches the clean MSE linearly as the budget
    shrinks; probed at 1e-6 and 1e-8."""
    from beamsec.defense import evaluate_robustness

    table = evaluate_robustness(tiny_trained.model, tiny_trained.test, [0.0, 1e-8, 1e-6])
    clean = table[0.0]
    rel6 = abs(table[1e-6] - clean) / clean
    rel8 = abs(table[1e-8] - clean) / clean
    assert rel6 < 1e-3
    assert rel8 < rel6
    if rel8 > 0:
        assert 20.0 <= rel6 / rel8 <= 500.0  # roughly linear in epsilon


def test_result_csv_round_trip(tmp_path, tiny_scenario):
    result = run_experiment(tiny_config(tiny_scenario))
    path = tmp_path / "results.csv"
    result.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "scenario,epsilon,repetition,mse"
    back = ExperimentResult.from_csv(path)
    assert [(r.scenario_id, r.epsilon, r.repetition) for r in back.rows] == [
        (r.scenario_id, r.epsilon, r.repetition) for r in result.rows
    ]
    for a, b in zip(back.rows, result.rows):
        assert a.mse == pytest.approx(b.mse, rel=1e-11)

    tpath = tmp_path / "timings.csv"
    result.timings_to_csv(tpath)
    assert tpath.read_text().splitlines()[0] == "scenario,epsilon,repetition,wall_time_s"

    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    with pytest.raises(ValueError):
        ExperimentResult.from_csv(bad)


# ----------------------------------------------------------------- summarize


def test_summarize_single_row():
    result = ExperimentResult(rows=[ResultRow("SC1", 0.0, 0, 0.25, 0.1)])
    summary = summarize(result)
    assert len(summary.rows) == 1
    row = summary.rows[0]
    assert (row.mean_mse, row.std_mse, row.min_mse, row.max_mse, row.n) == (
        0.25, 0.0, 0.25, 0.25, 1,
    )


def test_summarize_population_std_and_ratios():
    rows = [
        ResultRow("SC1", 0.0, 0, 0.1, 0.0),
        ResultRow("SC1", 0.0, 1, 0.3, 0.0),
        ResultRow("SC2", 0.1, 0, 0.8, 0.0),
        ResultRow("SC2", 0.1, 1, 0.8, 0.0),
    ]
    summary = summarize(ExperimentResult(rows=rows))
    sc1 = [r for r in summary.rows if r.scenario_id == "SC1"][0]
    assert sc1.mean_mse == pytest.approx(0.2, abs=1e-15)
    assert sc1.std_mse == pytest.approx(0.1, abs=1e-15)  # population formula
    assert summary.ratios["SC2_over_SC1"][0.1] == pytest.approx(4.0, abs=1e-12)


def test_summarize_group_count(tiny_scenario):
    cfg = tiny_config(tiny_scenario, repetitions=2, attack_grid=(0.05, 0.1))
    summary = summarize(run_experiment(cfg))
    # SC1 has one epsilon, SC2/SC3 have two each
    assert len(summary.rows) == 1 + 2 + 2
    with pytest.raises(ValueError):
        summarize(ExperimentResult(rows=[]))


# --------------------------------------------------------------- emit_report


def sample_summary() -> Summary:
    rows = [
        SummaryRow("SC1", 0.0, 0.001234567, 0.0001, 0.0011, 0.0013, 20),
        SummaryRow("SC2", 0.1, 0.012345678, 0.002, 0.01, 0.015, 20),
    ]
    return Summary(rows=rows, ratios={"SC2_over_SC1": {0.1: 10.00462}})


def test_emit_csv_report(tmp_path):
    paths = emit_report(sample_summary(), tmp_path, "csv")
    summary_csv = tmp_path / "summary.csv"
    assert summary_csv in paths
    lines = summary_csv.read_text().splitlines()
    assert lines[0] == "scenario,epsilon,mean_mse,std_mse,min_mse,max_mse,n"
    assert lines[1].startswith("SC1,0,0.00123457,")  # 6 significant digits
    ratios = (tmp_path / "ratios.csv").read_text().splitlines()
    assert ratios[0] == "scenario,epsilon,mse_ratio_vs_clean"
    assert ratios[1] == "SC2,0.1,10.0046"


def test_emit_report_byte_stable(tmp_path):
    emit_report(sample_summary(), tmp_path / "one", "csv")
    emit_report(sample_summary(), tmp_path / "two", "csv")
    assert (tmp_path / "one" / "summary.csv").read_bytes() == (
        tmp_path / "two" / "summary.csv"
    ).read_bytes()


def test_emit_json_round_trip(tmp_path):
    summary = sample_summary()
    (path,) = emit_report(summary, tmp_path, "json")
    back = summary_from_json(path)
    assert len(back.rows) == len(summary.rows)
    for a, b in zip(back.rows, summary.rows):
        assert a.scenario_id == b.scenario_id
        assert a.n == b.n
        assert a.mean_mse == pytest.approx(b.mean_mse, rel=1e-5)  # 6-digit render
    assert back.ratios["SC2_over_SC1"][0.1] == pytest.approx(10.00462, rel=1e-5)


def test_emit_report_rejects_bad_format(tmp_path):
    with pytest.raises(ConfigError):
        emit_report(sample_summary(), tmp_path, "xml")
    with pytest.raises(ValueError):
        emit_report(Summary(rows=[], ratios={}), tmp_path, "csv")


# ------------------------------------------------------------- configuration


def test_config_defaults_round_trip():
    cfg = ExperimentConfig()
    assert cfg.repetitions == 20
    assert cfg.base_seed == 1
    assert cfg.attack_grid == tuple(round(0.01 * i, 2) for i in range(1, 11))
    assert cfg.num_instances == 12500
    rebuilt = config_from_dict(config_to_dict(cfg))
    assert rebuilt == cfg


def test_config_rejects_unknown_fields():
    with pytest.raises(ConfigError, match="unknown config field: bogus"):
        config_from_dict({"bogus": 1})
    with pytest.raises(ConfigError, match="scenario.bogus"):
        config_from_dict({"scenario": {"bogus": 1}})
    with pytest.raises(ConfigError, match="train.bogus"):
        config_from_dict({"train": {"bogus": 1}})
    with pytest.raises(ConfigError, match="defense.bogus"):
        config_from_dict({"defense": {"bogus": 1}})


def test_config_type_errors_name_the_field():
    with pytest.raises(ConfigError, match="repetitions"):
        config_from_dict({"repetitions": 2.5})
    with pytest.raises(ConfigError, match="repetitions"):
        config_from_dict({"repetitions": True})
    with pytest.raises(ConfigError, match="train_fraction"):
        config_from_dict({"train_fraction": "most"})
    with pytest.raises(ConfigError, match=r"attack_grid\[1\]"):
        config_from_dict({"attack_grid": [0.1, "x"]})
    with pytest.raises(ConfigError):
        config_from_dict({"attack_grid": []})
    with pytest.raises(ConfigError):
        config_from_dict({"output_dir": 7})
    with pytest.raises(ConfigError):
        config_from_dict({"repetitions": 0})


def test_config_scenario_overrides_apply():
    doc = {
        "scenario": {
            "num_antennas": 8,
            "user_grid": {"x_min": 1.0, "x_max": 2.0, "y_min": 0.0, "y_max": 1.0, "spacing": 0.5},
            "walls": [[-1.0, 3.0, 10.0, 3.0]],
        },
        "attack_grid": [0.05],
    }
    cfg = config_from_dict(doc)
    assert cfg.scenario.num_antennas == 8
    assert cfg.scenario.user_grid == UserGrid(1.0, 2.0, 0.0, 1.0, 0.5)
    assert cfg.scenario.walls == (Wall(-1.0, 3.0, 10.0, 3.0),)
    assert cfg.attack_grid == (0.05,)


def test_load_config_file(tmp_path):
    assert load_config(None) == ExperimentConfig()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"repetitions": 3, "base_seed": 9}))
    cfg = load_config(path)
    assert (cfg.repetitions, cfg.base_seed) == (3, 9)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_experiment_config_validation(tiny_scenario):
    with pytest.raises(ValueError):
        tiny_config(tiny_scenario, attack_grid=())
    with pytest.raises(ValueError):
        tiny_config(tiny_scenario, attack_grid=(0.0,))
    with pytest.raises(ValueError):
        tiny_config(tiny_scenario, repetitions=0)
    with pytest.raises(ValueError):
        tiny_config(tiny_scenario, train_fraction=1.0)
    with pytest.raises(ValueError):
        tiny_config(tiny_scenario, num_instances=1)
