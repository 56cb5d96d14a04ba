"""The three evaluation metrics.

Completeness here is the direct per-state implementation (agent.act versus
the ground-truth set on every reachable non-terminal state); the experiment
runner uses the batched evaluator in evaluator.py, and the two must agree
state for state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..agent import Agent
from ..domains.base import Domain, Problem


@dataclass(frozen=True)
class StateVerdict:
    problem_id: str
    state_sig_hash: int
    complete: bool
    missing: tuple
    extra: tuple


def completeness(
    agent: Agent, domain: Domain, problems: Sequence[Problem]
) -> tuple[float, list[StateVerdict]]:
    """Fraction of reachable non-terminal states where the agent's proposed
    action set equals the ground truth's correct set exactly."""
    report: list[StateVerdict] = []
    complete = 0
    total = 0
    for problem in problems:
        start = domain.start_state(problem)
        for state in domain.reachable_states(problem):
            if state.done:
                continue
            gt = domain.correct_actions(problem, state)
            proposed = {app.key() for app in agent.act(state, start=start)}
            ok = proposed == gt
            total += 1
            complete += ok
            report.append(
                StateVerdict(
                    problem.problem_id,
                    hash(state.signature()),
                    ok,
                    tuple(sorted(gt - proposed)),
                    tuple(sorted(proposed - gt)),
                )
            )
    return (complete / total if total else 0.0), report


def productive_monotonicity(
    deltas: Iterable[tuple[float, float, bool]],
) -> float | None:
    """Fraction of nonzero certainty changes that move toward the true pole.

    Each entry is (certainty before, certainty after, truly correct);
    a change is productive when it moves toward +1 for correct actions and
    toward -1 for incorrect ones. All-zero deltas -> None (absent).
    """
    productive = 0
    nonzero = 0
    for before, after, label in deltas:
        delta = after - before
        if delta == 0.0:
            continue
        nonzero += 1
        if (label and delta > 0) or (not label and delta < 0):
            productive += 1
    if nonzero == 0:
        return None
    return productive / nonzero


def precision_at(
    threshold: str, predictions: Iterable[tuple[float, bool]]
) -> float | None:
    """Precision over predictions meeting a certainty threshold.

    threshold is ">=0.9" or "==1.0"; empty bucket -> None (absent).
    """
    if threshold == ">=0.9":
        qualifying = [label for cert, label in predictions if cert >= 0.9]
    elif threshold == "==1.0":
        qualifying = [label for cert, label in predictions if cert == 1.0]
    else:
        raise ValueError(f"unknown threshold {threshold!r}")
    if not qualifying:
        return None
    return sum(qualifying) / len(qualifying)
