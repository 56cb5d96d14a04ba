"""Multicolumn addition (3-digit + 3-digit), normal and zero-carry variants.

Ground truth: per column, the answer digit is the ones digit of
top + bottom + carry-in; a carry is written above the next column iff the
sum reaches 10 (zero-carry variant: the carry slot is always written, "0"
included); the answer digit and carry of a column may come in either order;
columns proceed strictly right to left; a final carry adds the extra
leftmost answer digit (copied from its carry slot); done finishes.
"""

from __future__ import annotations

from ..states import PRESS_BUTTON, UPDATE_FIELD, Action, WorkingState, load_interface
from .base import CorrectStep, Domain, Problem, UnreachableState, load_builtin_interface

# (column, a cell, b cell, carry-in cell, answer cell, carry-out cell)
COLUMNS = (
    ("ones", "a_ones", "b_ones", None, "ans_ones", "carry_tens"),
    ("tens", "a_tens", "b_tens", "carry_tens", "ans_tens", "carry_hund"),
    ("hund", "a_hund", "b_hund", "carry_hund", "ans_hund", "carry_thou"),
)


class McAdditionDomain(Domain):
    def __init__(self, zero_carry: bool):
        self.zero_carry = zero_carry
        self.domain_id = "mc_addition_zero_carry" if zero_carry else "mc_addition"
        self.variant = "zero_carry" if zero_carry else "normal"
        self.interface = load_builtin_interface("mc_addition")

    def generate(self, rng) -> Problem:
        a = rng.randint(100, 999)
        b = rng.randint(100, 999)
        return self.make_problem(a, b)

    def make_problem(self, a: int, b: int) -> Problem:
        return Problem(
            domain=self.domain_id,
            variant=self.variant,
            operands=(a, b),
            problem_id=f"{a}+{b}",
        )

    def start_state(self, problem: Problem) -> WorkingState:
        a, b = problem.operands
        values = {
            "a_hund": str(a // 100),
            "a_tens": str(a // 10 % 10),
            "a_ones": str(a % 10),
            "b_hund": str(b // 100),
            "b_tens": str(b // 10 % 10),
            "b_ones": str(b % 10),
        }
        return load_interface(self.interface, values)

    def correct_steps(
        self, problem: Problem, state: WorkingState, check: bool = False
    ) -> list[CorrectStep]:
        if check:
            self.validate_reachable(problem, state)
        if state.done:
            return []
        steps: list[CorrectStep] = []
        for name, a_id, b_id, cin_id, ans_id, cout_id in COLUMNS:
            total = int(state.value_of(a_id)) + int(state.value_of(b_id))
            carry_in_present = cin_id is not None and state.value_of(cin_id) != ""
            if carry_in_present:
                total += int(state.value_of(cin_id))
            args = (a_id, b_id, cin_id) if carry_in_present else (a_id, b_id)
            inner = "Add3(A0,A1,A2)" if carry_in_present else "Add(A0,A1)"
            if state.value_of(ans_id) == "":
                steps.append(
                    CorrectStep(
                        Action(ans_id, UPDATE_FIELD, str(total % 10)),
                        group=f"col_{name}",
                        formula=f"OnesDigit({inner})",
                        args=args,
                    )
                )
            if (self.zero_carry or total >= 10) and state.value_of(cout_id) == "":
                steps.append(
                    CorrectStep(
                        Action(cout_id, UPDATE_FIELD, str(total // 10)),
                        group=f"col_{name}",
                        formula=f"TensDigit({inner})",
                        args=args,
                    )
                )
            if steps:
                return steps
        final_carry = state.value_of("carry_thou")
        if final_carry not in ("", "0") and state.value_of("ans_thou") == "":
            return [
                CorrectStep(
                    Action("ans_thou", UPDATE_FIELD, final_carry),
                    group="extra",
                    formula="Copy(A0)",
                    args=("carry_thou",),
                )
            ]
        return [CorrectStep(Action("done", PRESS_BUTTON, ""), group="done", formula=None)]

    def validate_reachable(self, problem: Problem, state: WorkingState) -> None:
        expected = _expected_cells(self, problem)
        prior_incomplete = False
        for name, a_id, b_id, cin_id, ans_id, cout_id in COLUMNS:
            filled_any = False
            missing_any = False
            for cell in (ans_id, cout_id):
                value = state.value_of(cell)
                if value == "":
                    if cell in expected:
                        missing_any = True
                elif expected.get(cell) != value:
                    raise UnreachableState(f"{cell} holds {value!r} in {problem.problem_id}")
                else:
                    filled_any = True
            if filled_any and prior_incomplete:
                raise UnreachableState(
                    f"column {name} started before an earlier column in {problem.problem_id}"
                )
            prior_incomplete = prior_incomplete or missing_any
        value = state.value_of("ans_thou")
        if value != "":
            if expected.get("ans_thou") != value:
                raise UnreachableState(f"ans_thou holds {value!r} in {problem.problem_id}")
            if prior_incomplete:
                raise UnreachableState(f"ans_thou filled early in {problem.problem_id}")
        elif "ans_thou" in expected:
            prior_incomplete = True
        if state.done and prior_incomplete:
            raise UnreachableState(f"done pressed early in {problem.problem_id}")


def _expected_cells(domain: McAdditionDomain, problem: Problem) -> dict[str, str]:
    """Cell -> final value over a full correct solution."""
    a, b = problem.operands
    digits_a = (a % 10, a // 10 % 10, a // 100)
    digits_b = (b % 10, b // 10 % 10, b // 100)
    out: dict[str, str] = {}
    carry = 0
    for i, (name, a_id, b_id, cin_id, ans_id, cout_id) in enumerate(COLUMNS):
        total = digits_a[i] + digits_b[i] + carry
        out[ans_id] = str(total % 10)
        if domain.zero_carry or total >= 10:
            out[cout_id] = str(total // 10)
        carry = total // 10
    if carry:
        out["ans_thou"] = str(carry)
    return out
