import json

import pytest

from tutorsmith import htn as H


class FakeResolver:
    """Skill metadata for structural tests; no state evaluation needed."""

    def __init__(self, roots=None, action_types=None):
        self.roots = roots or {}
        self.types = action_types or {}

    def action_type(self, skill_id):
        return self.types.get(skill_id, "update_field")

    def comp_root(self, skill_id):
        return self.roots.get(skill_id)

    def candidates_at(self, state, skill_id, target):
        return []


def trace(*groups):
    return H.make_trace(
        [[H.TraceStep(sk, sel) for sk, sel in group] for group in groups]
    )


MUL = FakeResolver(
    roots={"mul": "Multiply", "add": "Add", "copy": "Copy", "tog": None, "done": None},
    action_types={"tog": "toggle_checkbox", "done": "press_button"},
)


def test_first_trace_is_strictly_ordered():
    htn = H.induce(H.HTN(), trace([("mul", "ans_num")], [("mul", "ans_den")], [("done", "done")]), MUL)
    method = htn.methods()[0]
    items = [g for g, _ in htn.expanded(method)]
    assert [sorted(g.refs()) for g in items] == [
        [("mul", "ans_num")], [("mul", "ans_den")], [("done", "done")]
    ]


def test_reordered_trace_fuses_unordered_group():
    htn = H.induce(H.HTN(), trace([("mul", "ans_num")], [("mul", "ans_den")], [("done", "done")]), MUL)
    htn = H.induce(htn, trace([("mul", "ans_den")], [("mul", "ans_num")], [("done", "done")]), MUL)
    assert len(htn.methods()) == 1
    items = [g for g, _ in htn.expanded(htn.methods()[0])]
    assert items[0].refs() == {("mul", "ans_num"), ("mul", "ans_den")}
    assert all(not m.optional for m in items[0].members)
    assert items[1].refs() == {("done", "done")}


def test_carry_becomes_optional():
    no_carry = trace([("ans2", "ans_ones")], [("ans2", "ans_tens")], [("done", "done")])
    carry = trace(
        [("ans2", "ans_ones"), ("carry2", "carry_tens")],
        [("ans3", "ans_tens")],
        [("done", "done")],
    )
    resolver = FakeResolver(
        roots={"ans2": "OnesDigit", "ans3": "OnesDigit", "carry2": "TensDigit", "done": None},
        action_types={"done": "press_button"},
    )
    htn = H.induce(H.HTN(), no_carry, resolver)
    htn = H.induce(htn, carry, resolver)
    assert len(htn.methods()) == 1
    items = [g for g, _ in htn.expanded(htn.methods()[0])]
    first = {m.ref: m.optional for m in items[0].members}
    assert first[("ans2", "ans_ones")] is False
    assert first[("carry2", "carry_tens")] is True  # absent in one trace
    second = {m.ref: m.optional for m in items[1].members}
    assert second == {("ans2", "ans_tens"): True, ("ans3", "ans_tens"): True}


def test_distinct_procedures_open_new_methods():
    multiply = trace([("mul", "ans_num"), ("mul", "ans_den")], [("done", "done")])
    add = trace([("add", "ans_num"), ("copy", "ans_den")], [("done", "done")])
    convert = trace(
        [("tog", "convert_box")],
        [("mul", "conv_num1"), ("mul", "conv_den1"), ("mul", "conv_num2"), ("mul", "conv_den2")],
        [("add", "ans_num"), ("copy", "ans_den")],
        [("done", "done")],
    )
    htn = H.induce(H.HTN(), add, MUL)
    htn = H.induce(htn, multiply, MUL)
    htn = H.induce(htn, convert, MUL)
    assert len(htn.methods()) == 3
    for t in (add, multiply, convert):
        assert H.parses_trace(htn, t)


def test_induction_is_rejection_safe_and_retains_traces():
    t1 = trace([("mul", "ans_num"), ("mul", "ans_den")], [("done", "done")])
    htn = H.induce(H.HTN(), t1, MUL)
    with pytest.raises(H.HtnError):
        H.induce(htn, H.make_trace([]), MUL)
    assert htn.retained == (t1,)


def test_acyclic_after_every_merge():
    htn = H.HTN()
    traces = [
        trace([("mul", "ans_num"), ("mul", "ans_den")], [("done", "done")]),
        trace([("add", "ans_num"), ("copy", "ans_den")], [("done", "done")]),
        trace(
            [("tog", "convert_box")],
            [("mul", "conv_num1"), ("mul", "conv_den1")],
            [("add", "ans_num"), ("copy", "ans_den")],
            [("done", "done")],
        ),
    ]
    for t in traces:
        htn = H.induce(htn, t, MUL)
        htn.assert_acyclic()
        for old in htn.retained:
            assert H.parses_trace(htn, old)


def test_subtask_factoring_extracts_shared_span():
    m1 = H.Method(
        "m1",
        (
            H.Group((H.Member(("a", "x")),)),
            H.Group((H.Member(("s", "p")),)),
            H.Group((H.Member(("s2", "q")),)),
        ),
    )
    m2 = H.Method(
        "m2",
        (
            H.Group((H.Member(("b", "y")),)),
            H.Group((H.Member(("s", "p")),)),
            H.Group((H.Member(("s2", "q")),)),
        ),
    )
    htn = H.HTN(tasks={"root": (m1, m2)})
    factored = H._factor_subtasks(htn)
    subtasks = [t for t in factored.tasks if t != "root"]
    assert len(subtasks) == 1
    for method in factored.methods():
        assert any(isinstance(it, H.SubtaskItem) for it in method.items)
    # behavior unchanged under expansion
    for m_old, m_new in zip(htn.methods(), factored.methods()):
        assert [g for g, _ in htn.expanded(m_old)] == [
            g for g, _ in factored.expanded(m_new)
        ]


def test_eligible_items_group_semantics():
    group = H.Group((H.Member(("a", "x")), H.Member(("b", "y"))))
    done = H.Group((H.Member(("done", "done")),))
    htn = H.HTN(tasks={"root": (H.Method("m1", (group, done)),)})
    cursor = H.Cursor("m1", 0, frozenset())
    refs = {r for r, _ in H.eligible_items(htn, cursor, None)}
    assert refs == {("a", "x"), ("b", "y")}
    tags = {t for _, t in H.eligible_items(htn, cursor, None)}
    assert len(tags) == 1  # same unordered group tag
    half = H.Cursor("m1", 0, frozenset({("a", "x")}))
    assert {r for r, _ in H.eligible_items(htn, half, None)} == {("b", "y")}


def test_optional_item_exposes_successor_and_gates_block():
    carry = H.Group((H.Member(("ans", "c1")), H.Member(("carry", "c2"), optional=True)))
    nxt = H.Group((H.Member(("ans", "n1")),))
    htn = H.HTN(tasks={"root": (H.Method("m1", (carry, nxt)),)})
    half = H.Cursor("m1", 0, frozenset({("ans", "c1")}))
    # without a gate: both the optional item and its successor are eligible
    refs = {r for r, _ in H.eligible_items(htn, half, None)}
    assert refs == {("carry", "c2"), ("ans", "n1")}
    # an accepting gate makes the optional item block its successor
    refs = {r for r, _ in H.eligible_items(htn, half, None, lambda ref: True)}
    assert refs == {("carry", "c2")}
    # a rejecting gate skips it
    refs = {r for r, _ in H.eligible_items(htn, half, None, lambda ref: False)}
    assert refs == {("carry", "c2"), ("ans", "n1")}


def test_advance_through_groups():
    group = H.Group((H.Member(("a", "x")), H.Member(("b", "y"))))
    opt = H.Group((H.Member(("c", "z"), optional=True),))
    done = H.Group((H.Member(("done", "done")),))
    htn = H.HTN(tasks={"root": (H.Method("m1", (group, opt, done)),)})
    c0 = H.Cursor("m1", 0, frozenset())
    c1 = H.advance(htn, c0, ("a", "x"))
    assert c1 == H.Cursor("m1", 0, frozenset({("a", "x")}))
    c2 = H.advance(htn, c1, ("b", "y"))
    assert c2 == H.Cursor("m1", 1, frozenset())
    # consuming the optional member commits to that branch
    c3 = H.advance(htn, c2, ("c", "z"))
    assert c3 == H.Cursor("m1", 2, frozenset())
    # skipping it is also legal: done is reachable directly
    c4 = H.advance(htn, c2, ("done", "done"))
    assert c4 == H.Cursor("m1", 3, frozenset())
    with pytest.raises(H.HtnError):
        H.advance(htn, c0, ("done", "done"))


def test_serialization_roundtrip():
    htn = H.induce(
        H.HTN(),
        trace([("mul", "ans_num"), ("mul", "ans_den")], [("done", "done")]),
        MUL,
    )
    doc = htn.to_dict()
    json.dumps(doc)  # serializable
    back = H.HTN.from_dict(doc)
    assert back.to_dict() == doc
    assert back.fingerprint() == htn.fingerprint()
