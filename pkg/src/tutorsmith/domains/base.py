"""Shared domain plumbing: problems, annotated correct steps, BFS enumeration."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import Iterable

from ..states import Action, InterfaceDefinition, WorkingState, apply_action


class UnreachableState(ValueError):
    """The queried state cannot arise from correct actions on this problem."""


@dataclass(frozen=True)
class Problem:
    domain: str
    variant: str
    operands: tuple
    problem_id: str

    def record(self) -> dict:
        return {
            "domain": self.domain,
            "variant": self.variant,
            "operands": list(self.operands),
            "problem_id": self.problem_id,
        }


@dataclass(frozen=True)
class CorrectStep:
    """One ground-truth action with its group tag and formula annotation."""

    action: Action
    group: str
    formula: str | None  # serialized composition, None for constant actions
    args: tuple[str, ...] = ()

    def key(self) -> tuple:
        return self.action.key()


def load_builtin_interface(name: str) -> InterfaceDefinition:
    ref = importlib.resources.files(__package__) / "interfaces" / f"{name}.json"
    import json

    return InterfaceDefinition.from_dict(json.loads(ref.read_text()))


class Domain:
    """Interface + generator + ground-truth tracer for one task family."""

    domain_id: str
    interface: InterfaceDefinition

    def generate(self, rng) -> Problem:
        raise NotImplementedError

    def start_state(self, problem: Problem) -> WorkingState:
        raise NotImplementedError

    def correct_steps(
        self, problem: Problem, state: WorkingState, check: bool = False
    ) -> list[CorrectStep]:
        raise NotImplementedError

    def validate_reachable(self, problem: Problem, state: WorkingState) -> None:
        """Raise UnreachableState unless correct actions can produce `state`."""
        for reachable in self.reachable_states(problem):
            if reachable.signature() == state.signature():
                return
        raise UnreachableState(f"state not reachable in {problem.problem_id}")

    def correct_actions(self, problem: Problem, state: WorkingState) -> set[tuple]:
        return {s.key() for s in self.correct_steps(problem, state)}

    def reachable_states(self, problem: Problem) -> list[WorkingState]:
        """All states reachable by correct actions, BFS order, content-merged.

        Includes the terminal done state (last layer).
        """
        start = self.start_state(problem)
        seen = {start.signature()}
        out = [start]
        frontier = [start]
        while frontier:
            layer = []
            for state in frontier:
                if state.done:
                    continue
                for step in self.correct_steps(problem, state):
                    nxt = apply_action(state, step.action)
                    sig = nxt.signature()
                    if sig not in seen:
                        seen.add(sig)
                        layer.append(nxt)
            layer.sort(key=lambda s: s.signature())
            out.extend(layer)
            frontier = layer
        return out

    def canonical_trace(self, problem: Problem) -> list[list[CorrectStep]]:
        """Groups of steps along the canonical path (full group per state)."""
        state = self.start_state(problem)
        groups: list[list[CorrectStep]] = []
        while not state.done:
            steps = sorted(self.correct_steps(problem, state), key=lambda s: s.key())
            if not steps:
                raise UnreachableState(
                    f"dead end before done in {problem.problem_id}"
                )
            groups.append(steps)
            for step in steps:
                state = apply_action(state, step.action)
        return groups

    def solved_state(self, problem: Problem) -> WorkingState:
        state = self.start_state(problem)
        for group in self.canonical_trace(problem):
            for step in group:
                state = apply_action(state, step.action)
        return state


def problems_distinct(problems: Iterable[Problem], holdout: Iterable[Problem]) -> bool:
    keys = {(p.domain, p.operands) for p in holdout}
    return all((p.domain, p.operands) not in keys for p in problems)
