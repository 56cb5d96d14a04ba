import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tutorsmith.domains import get_domain
from tutorsmith.patterns import (
    BindingExample,
    PatternError,
    generalize,
    induce_pattern,
    match_pattern,
)
from tutorsmith.states import Action, apply_action


@pytest.fixture
def mc():
    return get_domain("mc_addition")


def mc_state(mc, a=597, b=346, writes=()):
    state = mc.start_state(mc.make_problem(a, b))
    for sel, value in writes:
        state = apply_action(state, Action(sel, "update_field", value))
    return state


def test_single_example_is_fully_literal(mc):
    state = mc_state(mc)
    pattern = induce_pattern(
        [BindingExample(state, "ans_ones", ("a_ones", "b_ones"))], mc.interface
    )
    assert pattern.selection == ("literal", "ans_ones")
    assert all(c[0] == "literal" for c in pattern.args)
    assert match_pattern(pattern, state) == [("ans_ones", ("a_ones", "b_ones"))]


def test_two_columns_generalize_to_offsets(mc):
    s1 = mc_state(mc)
    s2 = mc_state(mc, writes=[("ans_ones", "3"), ("carry_tens", "1")])
    pattern = induce_pattern(
        [
            BindingExample(s1, "ans_ones", ("a_ones", "b_ones")),
            BindingExample(s2, "ans_tens", ("a_tens", "b_tens")),
        ],
        mc.interface,
    )
    assert pattern.selection == ("kind", "textfield")
    # one shape, selection generalized: matches every blank answer cell with
    # operands directly above
    fresh = mc_state(mc)
    bindings = match_pattern(pattern, fresh)
    assert ("ans_ones", ("a_ones", "b_ones")) in bindings
    assert ("ans_tens", ("a_tens", "b_tens")) in bindings
    assert ("ans_hund", ("a_hund", "b_hund")) in bindings
    assert len(bindings) == 3  # ans_thou has no operands above


def test_constant_argument_stays_literal():
    fr = get_domain("fractions")
    s1 = fr.start_state(fr.make_problem(5, 6, "+", 2, 3))
    s2 = fr.start_state(fr.make_problem(1, 9, "+", 1, 3))
    pattern = induce_pattern(
        [
            BindingExample(s1, "conv_num1", ("den2", "num1")),
            BindingExample(s2, "conv_num1", ("den2", "num1")),
        ],
        fr.interface,
    )
    assert pattern.args == (("literal", "den2"), ("literal", "num1"))


def test_blank_selection_required_for_update(mc):
    state = mc_state(mc)
    pattern = induce_pattern(
        [BindingExample(state, "ans_ones", ("a_ones", "b_ones"))], mc.interface
    )
    filled = mc_state(mc, writes=[("ans_ones", "3")])
    assert match_pattern(pattern, filled) == []


def test_nonempty_arguments_required(mc):
    state = mc_state(mc)
    # carry cell as an argument is blank at the start: no match
    pattern = induce_pattern(
        [
            BindingExample(
                mc_state(mc, writes=[("carry_tens", "1")]),
                "ans_tens",
                ("a_tens", "b_tens", "carry_tens"),
            )
        ],
        mc.interface,
    )
    assert match_pattern(pattern, state) == []


def test_done_state_matches_nothing(mc):
    state = mc_state(mc)
    pattern = induce_pattern(
        [BindingExample(state, "ans_ones", ("a_ones", "b_ones"))], mc.interface
    )
    done = apply_action(mc_state(mc), Action("done", "press_button", ""))
    assert match_pattern(pattern, done) == []


def test_coverage_of_training_bindings(mc):
    fr = get_domain("fractions")
    examples = []
    for ops in ((5, 6, "+", 2, 3), (1, 9, "+", 1, 3)):
        state = fr.start_state(fr.make_problem(*ops))
        examples.append(BindingExample(state, "ans_num", ("num1", "num2")))
        examples.append(BindingExample(state, "ans_den", ("den1", "den2")))
    pattern = induce_pattern(examples, fr.interface)
    for ex in examples:
        assert (ex.selection, ex.args) in match_pattern(pattern, ex.state)


def test_generalize_is_monotone(mc):
    s1 = mc_state(mc)
    s2 = mc_state(mc, writes=[("ans_ones", "3"), ("carry_tens", "1")])
    base = induce_pattern(
        [
            BindingExample(s1, "ans_ones", ("a_ones", "b_ones")),
            BindingExample(s2, "ans_tens", ("a_tens", "b_tens")),
        ],
        mc.interface,
    )
    probe = mc_state(mc, a=111, b=222)
    before = set(match_pattern(base, probe))
    s3 = mc_state(mc, writes=[("ans_ones", "3"), ("carry_tens", "1"),
                              ("ans_tens", "4"), ("carry_hund", "1")])
    wider = generalize(base, BindingExample(s3, "ans_hund", ("a_hund", "b_hund")))
    after = set(match_pattern(wider, probe))
    assert before <= after


def test_inconsistent_arity_rejected(mc):
    state = mc_state(mc)
    with pytest.raises(PatternError):
        induce_pattern(
            [
                BindingExample(state, "ans_ones", ("a_ones", "b_ones")),
                BindingExample(state, "ans_tens", ("a_tens",)),
            ],
            mc.interface,
        )


@settings(max_examples=20, deadline=None)
@given(st.integers(100, 999), st.integers(100, 999))
def test_match_is_deterministic(a, b):
    mc = get_domain("mc_addition")
    state = mc.start_state(mc.make_problem(a, b))
    pattern = induce_pattern(
        [
            BindingExample(state, "ans_ones", ("a_ones", "b_ones")),
            BindingExample(
                apply_action(state, Action("ans_ones", "update_field", "0")),
                "ans_tens",
                ("a_tens", "b_tens"),
            ),
        ],
        mc.interface,
    )
    assert match_pattern(pattern, state) == match_pattern(pattern, state)
    assert match_pattern(pattern, state) == sorted(match_pattern(pattern, state))
