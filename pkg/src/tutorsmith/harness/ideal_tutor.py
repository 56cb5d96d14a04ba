"""Automated ideal-tutor training loop.

Walks every ground-truth-reachable state of a problem in deterministic BFS
order; at each state every agent proposal receives its true label, and
every correct action the agent missed is demonstrated with a full
annotation (formula and arguments), replicating an author who always picks
the right explanation and grades everything.
"""

from __future__ import annotations

import logging

from ..agent import Agent
from ..domains.base import Domain, Problem

log = logging.getLogger(__name__)


def train_on_problem(agent: Agent, domain: Domain, problem: Problem) -> None:
    start = domain.start_state(problem)
    agent.begin_problem(problem.problem_id, start)
    for state in domain.reachable_states(problem):
        if state.done:
            continue
        steps = domain.correct_steps(problem, state)
        correct = {s.key(): s for s in steps}
        proposals = agent.act(state)
        for app in proposals:
            label = app.key() in correct
            if not label and not _classifiable(app, state):
                log.warning(
                    "proposal on malformed target %s in %s counted negative",
                    app.selection,
                    problem.problem_id,
                )
            agent.train_feedback(state, app, label)
        proposed = {app.key() for app in proposals}
        for key in sorted(correct):
            if key in proposed:
                continue
            step = correct[key]
            annotation = (
                {"formula": step.formula, "args": list(step.args)}
                if step.formula is not None
                else {}
            )
            agent.train_demo(state, step.action, annotation)


def _classifiable(app, state) -> bool:
    try:
        state.get(app.selection)
        return True
    except Exception:
        return False
