import json

import pytest

from tutorsmith.harness.runner import (
    ExperimentConfig,
    holdout_problems,
    run_experiment,
    summarize,
    training_problems,
)


def small_config(**overrides):
    base = dict(
        domain="fractions", learner="stand", htn=True,
        n_train=3, n_holdout=3, reps=2, seed=42, workers=1,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_holdout_disjoint_from_training():
    config = small_config(n_train=30, n_holdout=30)
    holdout = holdout_problems(config)
    keys = {(p.domain, p.operands) for p in holdout}
    for rep in range(2):
        training = training_problems(config, rep, holdout)
        assert len(training) == 30
        assert all((p.domain, p.operands) not in keys for p in training)


def test_holdout_shared_across_reps_training_fresh():
    config = small_config()
    h1 = holdout_problems(config)
    h2 = holdout_problems(config)
    assert [p.operands for p in h1] == [p.operands for p in h2]
    t0 = training_problems(config, 0, h1)
    t1 = training_problems(config, 1, h1)
    assert [p.operands for p in t0] != [p.operands for p in t1]


def test_minimal_run_emits_one_record_per_problem(tmp_path):
    out = tmp_path / "r.jsonl"
    config = small_config(n_train=1, reps=1, out=str(out))
    records = run_experiment(config)
    assert len(records) == 1
    assert records[0]["rep"] == 0 and records[0]["problem"] == 1
    lines = out.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0]) == records[0]


def test_byte_identical_outputs_across_runs_and_workers(tmp_path):
    outs = []
    for name, workers in (("a", 1), ("b", 2), ("c", 1)):
        out = tmp_path / f"{name}.jsonl"
        run_experiment(small_config(out=str(out), workers=workers))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    summaries = [
        (tmp_path / f"{n}.jsonl.summary.json").read_bytes() for n in ("a", "b", "c")
    ]
    assert summaries[0] == summaries[1] == summaries[2]


def test_csv_format(tmp_path):
    out = tmp_path / "r.csv"
    run_experiment(small_config(out=str(out), fmt="csv", reps=1, n_train=2))
    lines = out.read_text().splitlines()
    assert lines[0].startswith("rep,problem,completeness")
    assert len(lines) == 3


def test_summary_contents(tmp_path):
    out = tmp_path / "r.jsonl"
    config = small_config(out=str(out), reps=2, n_train=3)
    records = run_experiment(config)
    summary = summarize(config, records)
    assert summary["reps"] == 2
    assert summary["final_problem"] == 3
    assert len(summary["per_problem"]) == 3
    assert 0 <= summary["complete_reps_at_final"] <= 2
    for row in summary["per_problem"]:
        assert 0.0 <= row["mean_completeness"] <= 1.0


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        small_config(n_train=0)
    with pytest.raises(Exception):
        small_config(domain="unknown_domain")
    with pytest.raises(Exception):
        small_config(learner="xgboost")
