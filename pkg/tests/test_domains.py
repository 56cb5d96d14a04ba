import random
from fractions import Fraction

import pytest

from tutorsmith.domains import DOMAIN_IDS, get_domain
from tutorsmith.domains.base import UnreachableState
from tutorsmith.states import Action, apply_action


def test_registry():
    assert set(DOMAIN_IDS) == {"mc_addition", "mc_addition_zero_carry", "fractions"}
    with pytest.raises(KeyError):
        get_domain("algebra")


# --- generators ---------------------------------------------------------------


def test_mc_generator_bounds():
    mc = get_domain("mc_addition")
    rng = random.Random(0)
    for _ in range(200):
        p = mc.generate(rng)
        a, b = p.operands
        assert 100 <= a <= 999 and 100 <= b <= 999


def test_fraction_generator_stratifies_procedures():
    fr = get_domain("fractions")
    rng = random.Random(0)
    counts = {"multiply": 0, "add_same": 0, "convert": 0}
    n = 3000
    for _ in range(n):
        p = fr.generate(rng)
        counts[p.variant] += 1
        for v in (p.operands[0], p.operands[1], p.operands[3], p.operands[4]):
            assert 1 <= v <= 12
    for variant, count in counts.items():
        assert count / n >= 0.25, f"{variant} under-represented: {count}/{n}"


# --- ground truth correct sets --------------------------------------------------


def test_189_542_carry_column_actions():
    mc = get_domain("mc_addition")
    p = mc.make_problem(189, 542)
    state = mc.start_state(p)
    state = apply_action(state, Action("ans_ones", "update_field", "1"))
    state = apply_action(state, Action("carry_tens", "update_field", "1"))
    steps = {s.key(): s for s in mc.correct_steps(p, state)}
    assert ("ans_tens", "update_field", "3") in steps
    assert ("carry_hund", "update_field", "1") in steps
    assert len(steps) == 2
    ans = steps[("ans_tens", "update_field", "3")]
    assert ans.formula == "OnesDigit(Add3(A0,A1,A2))"
    assert ans.args == ("a_tens", "b_tens", "carry_tens")
    # the no-carry two-argument sum is NOT in the set
    assert ("ans_tens", "update_field", "2") not in steps
    # both orders within the column group
    tags = {s.group for s in steps.values()}
    assert tags == {"col_tens"}


def test_fraction_conversion_set_for_5_6_plus_2_3():
    fr = get_domain("fractions")
    p = fr.make_problem(5, 6, "+", 2, 3)
    state = apply_action(
        fr.start_state(p), Action("convert_box", "toggle_checkbox", "checked")
    )
    steps = fr.correct_steps(p, state)
    assert {(s.action.selection, s.action.input) for s in steps} == {
        ("conv_num1", "15"), ("conv_den1", "18"), ("conv_num2", "12"), ("conv_den2", "18"),
    }
    assert {s.group for s in steps} == {"convert_cells"}


def test_multiply_start_set():
    fr = get_domain("fractions")
    p = fr.make_problem(4, 5, "x", 8, 3)
    steps = fr.correct_steps(p, fr.start_state(p))
    assert {(s.action.selection, s.action.input) for s in steps} == {
        ("ans_num", "32"), ("ans_den", "15"),
    }


def test_terminal_state_has_empty_set():
    fr = get_domain("fractions")
    p = fr.make_problem(4, 5, "x", 8, 3)
    done = fr.solved_state(p)  # canonical trace ends with the done press
    assert done.done
    assert fr.correct_steps(p, done) == []


def test_unreachable_state_rejected():
    mc = get_domain("mc_addition")
    p = mc.make_problem(597, 346)
    bad = apply_action(mc.start_state(p), Action("ans_ones", "update_field", "9"))
    with pytest.raises(UnreachableState):
        mc.correct_steps(p, bad, check=True)
    skipped = apply_action(mc.start_state(p), Action("ans_tens", "update_field", "4"))
    with pytest.raises(UnreachableState):
        mc.correct_steps(p, skipped, check=True)


def test_zero_carry_writes_zeros():
    zc = get_domain("mc_addition_zero_carry")
    p = zc.make_problem(123, 456)
    state = zc.start_state(p)
    steps = {s.key() for s in zc.correct_steps(p, state)}
    assert ("ans_ones", "update_field", "9") in steps
    assert ("carry_tens", "update_field", "0") in steps  # 3+6 < 10 still writes 0
    groups = zc.canonical_trace(p)
    filled = state
    for group in groups[:-1]:  # everything except the done press
        for step in group:
            filled = apply_action(filled, step.action)
    assert filled.value_of("carry_thou") == "0"
    assert filled.value_of("ans_thou") == ""  # no leading zero in the answer
    assert {s.key() for s in zc.correct_steps(p, filled)} == {("done", "press_button", "")}
    assert zc.solved_state(p).done


# --- reachable states -----------------------------------------------------------


def brute_force_states(domain, problem):
    """Independent recursive enumeration (DFS, content-keyed)."""
    seen = {}

    def visit(state):
        sig = state.signature()
        if sig in seen:
            return
        seen[sig] = state
        if state.done:
            return
        for step in domain.correct_steps(problem, state):
            visit(apply_action(state, step.action))

    visit(domain.start_state(problem))
    return seen


def test_multiply_problem_has_four_nonterminal_states():
    fr = get_domain("fractions")
    p = fr.make_problem(4, 5, "x", 8, 3)
    states = fr.reachable_states(p)
    nonterminal = [s for s in states if not s.done]
    assert len(nonterminal) == 4  # start, after-num, after-den, after-both
    assert len(states) == 5


def test_reachable_counts_match_brute_force():
    rng = random.Random(7)
    for domain_id in DOMAIN_IDS:
        domain = get_domain(domain_id)
        for _ in range(12):
            p = domain.generate(rng)
            bfs = domain.reachable_states(p)
            assert len(bfs) == len(brute_force_states(domain, p))
            assert len({s.signature() for s in bfs}) == len(bfs)


def test_done_state_has_no_successors():
    fr = get_domain("fractions")
    p = fr.make_problem(1, 2, "+", 1, 2)
    for state in fr.reachable_states(p):
        if state.done:
            assert fr.correct_steps(p, state) == []


# --- answer correctness over maximal paths --------------------------------------


def test_mc_answers_equal_decimal_sum_every_path():
    rng = random.Random(3)
    for domain_id in ("mc_addition", "mc_addition_zero_carry"):
        domain = get_domain(domain_id)
        for _ in range(25):
            p = domain.generate(rng)
            a, b = p.operands
            final = domain.solved_state(p)
            digits = "".join(
                final.value_of(c) for c in ("ans_thou", "ans_hund", "ans_tens", "ans_ones")
            )
            assert int(digits) == a + b


def test_fraction_answers_equal_exact_rational():
    fr = get_domain("fractions")
    rng = random.Random(4)
    for _ in range(40):
        p = fr.generate(rng)
        n1, d1, op, n2, d2 = p.operands
        final = fr.solved_state(p)
        got = Fraction(int(final.value_of("ans_num")), int(final.value_of("ans_den")))
        expected = (
            Fraction(n1, d1) * Fraction(n2, d2)
            if op == "x"
            else Fraction(n1, d1) + Fraction(n2, d2)
        )
        assert got == expected
        if p.variant == "convert":
            # conversion never reduces: common denominator is the product
            assert final.value_of("ans_den") == str(d1 * d2)


def test_oracle_replay_reaches_done_everywhere():
    rng = random.Random(5)
    for domain_id in DOMAIN_IDS:
        domain = get_domain(domain_id)
        for _ in range(10):
            p = domain.generate(rng)
            state = domain.start_state(p)
            for group in domain.canonical_trace(p):
                for step in group:
                    state = apply_action(state, step.action)
            assert state.done
