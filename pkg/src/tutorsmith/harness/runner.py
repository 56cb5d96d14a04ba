"""Experiment runner: seeded training sequences, checkpoint metrics, output.

Seed scheme: the holdout set uses seed*10^6 - 1 (shared across repetitions)
and repetition r trains on a fresh sequence from seed*10^6 + r. Training
draws colliding with a holdout operand tuple are redrawn, so the holdout
stays disjoint by construction (asserted). Records are deterministic for a
fixed config, byte-identical across runs and worker counts; wall-clock
timings go to a separate .timing sidecar so the primary output stays
reproducible.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
import random
import time
from dataclasses import asdict, dataclass, field

from ..agent import Agent, AgentConfig
from ..domains import get_domain
from ..domains.base import problems_distinct
from .evaluator import HoldoutEvaluator
from .ideal_tutor import train_on_problem

RECORD_FIELDS = (
    "rep",
    "problem",
    "completeness",
    "states_total",
    "states_complete",
    "pm_productive",
    "pm_nonzero",
    "prec90_n",
    "prec90_correct",
    "prec100_n",
    "prec100_correct",
)


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str
    learner: str = "stand"
    htn: bool = False
    n_train: int = 100
    n_holdout: int = 100
    reps: int = 40
    seed: int = 1
    out: str | None = None
    fmt: str = "jsonl"
    workers: int = 1

    def __post_init__(self):
        if self.n_train <= 0 or self.n_holdout <= 0 or self.reps <= 0:
            raise ValueError("counts must be positive")
        if self.fmt not in ("jsonl", "csv"):
            raise ValueError(f"unknown format {self.fmt!r}")
        get_domain(self.domain)  # validates
        AgentConfig(learner=self.learner)  # validates learner kind


def holdout_problems(config: ExperimentConfig) -> list:
    domain = get_domain(config.domain)
    rng = random.Random(config.seed * 10**6 - 1)
    return [domain.generate(rng) for _ in range(config.n_holdout)]


def training_problems(config: ExperimentConfig, rep: int, holdout: list) -> list:
    domain = get_domain(config.domain)
    keys = {(p.domain, p.operands) for p in holdout}
    rng = random.Random(config.seed * 10**6 + rep)
    out = []
    while len(out) < config.n_train:
        problem = domain.generate(rng)
        if (problem.domain, problem.operands) in keys:
            continue  # redraw: holdout must stay disjoint from training
        out.append(problem)
    assert problems_distinct(out, holdout)
    return out


_EVALUATOR_CACHE: dict = {}


def _shared_evaluator(config: ExperimentConfig):
    key = (config.domain, config.seed, config.n_holdout)
    evaluator = _EVALUATOR_CACHE.get(key)
    if evaluator is None:
        evaluator = HoldoutEvaluator(get_domain(config.domain), holdout_problems(config))
        _EVALUATOR_CACHE[key] = evaluator
    evaluator.reset_run()
    return evaluator


def run_repetition(config: ExperimentConfig, rep: int) -> tuple[list[dict], list[dict]]:
    domain = get_domain(config.domain)
    evaluator = _shared_evaluator(config)
    training = training_problems(config, rep, evaluator.problems)
    agent = Agent(
        AgentConfig(
            learner=config.learner,
            htn=config.htn,
            seed=config.seed * 10**6 + rep,
        )
    )
    records = []
    timings = []
    for t, problem in enumerate(training, start=1):
        t0 = time.perf_counter()
        train_on_problem(agent, domain, problem)
        t1 = time.perf_counter()
        metrics = evaluator.evaluate(agent)
        t2 = time.perf_counter()
        record = {"rep": rep, "problem": t}
        record.update(metrics)
        records.append(record)
        timings.append(
            {
                "rep": rep,
                "problem": t,
                "train_ms": round((t1 - t0) * 1000.0, 3),
                "eval_ms": round((t2 - t1) * 1000.0, 3),
            }
        )
    return records, timings


def _rep_task(args):
    config, rep = args
    return run_repetition(config, rep)


def run_experiment(config: ExperimentConfig) -> list[dict]:
    reps = list(range(config.reps))
    if config.workers > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(config.workers) as pool:
            results = pool.map(_rep_task, [(config, r) for r in reps])
    else:
        results = [_rep_task((config, r)) for r in reps]
    records = [rec for recs, _ in results for rec in recs]
    timings = [t for _, ts in results for t in ts]
    records.sort(key=lambda r: (r["rep"], r["problem"]))
    timings.sort(key=lambda r: (r["rep"], r["problem"]))
    if config.out:
        write_records(config, records)
        write_summary(config, records)
        with open(f"{config.out}.timing.jsonl", "w") as f:
            for t in timings:
                f.write(json.dumps(t, sort_keys=True) + "\n")
    return records


def write_records(config: ExperimentConfig, records: list[dict]) -> None:
    if config.fmt == "jsonl":
        with open(config.out, "w") as f:
            for record in records:
                f.write(json.dumps(record, sort_keys=True) + "\n")
    else:
        with open(config.out, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=RECORD_FIELDS)
            writer.writeheader()
            for record in records:
                writer.writerow(record)


def pm_fraction(records: list[dict]) -> float | None:
    productive = sum(r["pm_productive"] for r in records)
    nonzero = sum(r["pm_nonzero"] for r in records)
    return productive / nonzero if nonzero else None


def precision_pooled(records: list[dict], bucket: str) -> float | None:
    if bucket == ">=0.9":
        n = sum(r["prec90_n"] for r in records)
        c = sum(r["prec90_correct"] for r in records)
    else:
        n = sum(r["prec100_n"] for r in records)
        c = sum(r["prec100_correct"] for r in records)
    return c / n if n else None


def summarize(config: ExperimentConfig, records: list[dict]) -> dict:
    by_problem: dict[int, list[dict]] = {}
    for record in records:
        by_problem.setdefault(record["problem"], []).append(record)
    per_problem = []
    for t in sorted(by_problem):
        recs = sorted(by_problem[t], key=lambda r: r["rep"])
        pm_values = [
            r["pm_productive"] / r["pm_nonzero"] for r in recs if r["pm_nonzero"]
        ]
        per_problem.append(
            {
                "problem": t,
                "mean_completeness": sum(r["completeness"] for r in recs) / len(recs),
                "mean_pm": sum(pm_values) / len(pm_values) if pm_values else None,
            }
        )
    final = max(by_problem)
    complete_reps = sum(
        1 for r in by_problem[final] if r["completeness"] == 1.0
    )
    late = [r for r in records if r["problem"] >= 20]
    # out path and worker count are execution details: outputs must be
    # byte-identical across worker counts for one experiment identity
    config_doc = asdict(config)
    config_doc.pop("out", None)
    config_doc.pop("workers", None)
    return {
        "config": config_doc,
        "per_problem": per_problem,
        "final_problem": final,
        "complete_reps_at_final": complete_reps,
        "reps": config.reps,
        "precision_pooled": {
            ">=0.9": precision_pooled(records, ">=0.9"),
            "==1.0": precision_pooled(records, "==1.0"),
        },
        "precision_pooled_from_20": {
            ">=0.9": precision_pooled(late, ">=0.9"),
            "==1.0": precision_pooled(late, "==1.0"),
        },
    }


def write_summary(config: ExperimentConfig, records: list[dict]) -> None:
    with open(f"{config.out}.summary.json", "w") as f:
        json.dump(summarize(config, records), f, sort_keys=True, indent=1)
        f.write("\n")
