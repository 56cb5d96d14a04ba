"""Fraction arithmetic: multiply, add with equal denominators, convert-then-add.

Conversion multiplies the denominators (no reduction to lowest terms: the
common denominator of 5/6 + 2/3 is 18) and multiplies crosswise for the
converted numerators. The convert checkbox must precede the conversion
cells and is never checked for multiplication or same-denominator addition.
The four conversion cells fill in any order, the two answer cells in any
order, and done finishes.
"""

from __future__ import annotations

from ..states import (
    CHECKED,
    PRESS_BUTTON,
    TOGGLE_CHECKBOX,
    UPDATE_FIELD,
    Action,
    WorkingState,
    load_interface,
)
from .base import CorrectStep, Domain, Problem, UnreachableState, load_builtin_interface

PROCEDURES = ("multiply", "add_same", "convert")

# conversion cell -> (value function on operands, argument cells)
_CONVERSIONS = (
    ("conv_num1", lambda n1, d1, n2, d2: n1 * d2, ("den2", "num1")),
    ("conv_den1", lambda n1, d1, n2, d2: d1 * d2, ("den1", "den2")),
    ("conv_num2", lambda n1, d1, n2, d2: n2 * d1, ("den1", "num2")),
    ("conv_den2", lambda n1, d1, n2, d2: d2 * d1, ("den1", "den2")),
)


class FractionsDomain(Domain):
    domain_id = "fractions"
    variant = "mixed"

    def __init__(self):
        self.interface = load_builtin_interface("fractions")

    def generate(self, rng) -> Problem:
        procedure = PROCEDURES[rng.randrange(3)]
        num1 = rng.randint(1, 12)
        den1 = rng.randint(1, 12)
        num2 = rng.randint(1, 12)
        if procedure == "multiply":
            op = "x"
            den2 = rng.randint(1, 12)
        elif procedure == "add_same":
            op = "+"
            den2 = den1
        else:
            op = "+"
            den2 = rng.randint(1, 12)
            while den2 == den1:
                den2 = rng.randint(1, 12)
        return self.make_problem(num1, den1, op, num2, den2)

    def make_problem(self, num1: int, den1: int, op: str, num2: int, den2: int) -> Problem:
        if op not in ("x", "+"):
            raise ValueError(f"operation must be 'x' or '+', got {op!r}")
        if op == "x":
            procedure = "multiply"
        elif den1 == den2:
            procedure = "add_same"
        else:
            procedure = "convert"
        return Problem(
            domain=self.domain_id,
            variant=procedure,
            operands=(num1, den1, op, num2, den2),
            problem_id=f"{num1}/{den1}{op}{num2}/{den2}",
        )

    def start_state(self, problem: Problem) -> WorkingState:
        num1, den1, op, num2, den2 = problem.operands
        values = {
            "num1": str(num1),
            "den1": str(den1),
            "op": op,
            "num2": str(num2),
            "den2": str(den2),
        }
        return load_interface(self.interface, values)

    def correct_steps(
        self, problem: Problem, state: WorkingState, check: bool = False
    ) -> list[CorrectStep]:
        if check:
            self.validate_reachable(problem, state)
        if state.done:
            return []
        num1, den1, op, num2, den2 = problem.operands
        steps: list[CorrectStep] = []
        if problem.variant == "multiply":
            _answer_steps(
                steps,
                state,
                num_value=num1 * num2,
                num_formula=("Multiply(A0,A1)", ("num1", "num2")),
                den_value=den1 * den2,
                den_formula=("Multiply(A0,A1)", ("den1", "den2")),
            )
        elif problem.variant == "add_same":
            _answer_steps(
                steps,
                state,
                num_value=num1 + num2,
                num_formula=("Add(A0,A1)", ("num1", "num2")),
                den_value=den1,
                den_formula=("Copy(A0)", ("den1",)),
            )
        else:
            if state.value_of("convert_box") != CHECKED:
                return [
                    CorrectStep(
                        Action("convert_box", TOGGLE_CHECKBOX, CHECKED),
                        group="convert",
                        formula=None,
                    )
                ]
            for cell, value_fn, args in _CONVERSIONS:
                if state.value_of(cell) == "":
                    steps.append(
                        CorrectStep(
                            Action(cell, UPDATE_FIELD, str(value_fn(num1, den1, num2, den2))),
                            group="convert_cells",
                            formula="Multiply(A0,A1)",
                            args=args,
                        )
                    )
            if steps:
                return steps
            _answer_steps(
                steps,
                state,
                num_value=num1 * den2 + num2 * den1,
                num_formula=("Add(A0,A1)", ("conv_num1", "conv_num2")),
                den_value=den1 * den2,
                den_formula=("Copy(A0)", ("conv_den1",)),
            )
        if steps:
            return steps
        return [CorrectStep(Action("done", PRESS_BUTTON, ""), group="done", formula=None)]

    def validate_reachable(self, problem: Problem, state: WorkingState) -> None:
        expected = _expected_cells(problem)
        stage_missing = False
        for stage in _stages(problem):
            filled_any = False
            missing_any = False
            for cell in stage:
                value = state.value_of(cell)
                if value == "":
                    missing_any = True
                elif expected.get(cell) != value:
                    raise UnreachableState(f"{cell} holds {value!r} in {problem.problem_id}")
                else:
                    filled_any = True
            if filled_any and stage_missing:
                raise UnreachableState(
                    f"later stage started early in {problem.problem_id}"
                )
            stage_missing = stage_missing or missing_any
        for cell in ("convert_box", "conv_num1", "conv_den1", "conv_num2", "conv_den2",
                     "ans_num", "ans_den"):
            value = state.value_of(cell)
            if value != "" and cell not in expected:
                raise UnreachableState(f"{cell} holds {value!r} in {problem.problem_id}")
        if state.done and stage_missing:
            raise UnreachableState(f"done pressed early in {problem.problem_id}")


def _answer_steps(steps, state, num_value, num_formula, den_value, den_formula):
    if state.value_of("ans_num") == "":
        formula, args = num_formula
        steps.append(
            CorrectStep(
                Action("ans_num", UPDATE_FIELD, str(num_value)),
                group="answer",
                formula=formula,
                args=args,
            )
        )
    if state.value_of("ans_den") == "":
        formula, args = den_formula
        steps.append(
            CorrectStep(
                Action("ans_den", UPDATE_FIELD, str(den_value)),
                group="answer",
                formula=formula,
                args=args,
            )
        )


def _expected_cells(problem: Problem) -> dict[str, str]:
    num1, den1, op, num2, den2 = problem.operands
    if problem.variant == "multiply":
        return {"ans_num": str(num1 * num2), "ans_den": str(den1 * den2)}
    if problem.variant == "add_same":
        return {"ans_num": str(num1 + num2), "ans_den": str(den1)}
    out = {"convert_box": CHECKED}
    for cell, value_fn, _ in _CONVERSIONS:
        out[cell] = str(value_fn(num1, den1, num2, den2))
    out["ans_num"] = str(num1 * den2 + num2 * den1)
    out["ans_den"] = str(den1 * den2)
    return out


def _stages(problem: Problem) -> list[tuple[str, ...]]:
    if problem.variant == "convert":
        return [
            ("convert_box",),
            ("conv_num1", "conv_den1", "conv_num2", "conv_den2"),
            ("ans_num", "ans_den"),
        ]
    return [("ans_num", "ans_den")]
