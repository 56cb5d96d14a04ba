"""Where-learning: induces per-skill matching patterns over interface layout.

Generalization per variable follows a least-general ladder: exact element
id, then a fixed (column, row) offset from the selection, then the set of
observed offsets, then kind-only. The pattern still over-generates on new
states (rejecting wrong candidate bindings is when-learning's job), but the
offset-set rung keeps argument candidates anchored to layout roles instead
of flooding the classifier with every nonempty cell pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .states import UPDATE_FIELD, InterfaceDefinition, WorkingState


class PatternError(ValueError):
    pass


# offsets beyond this fall to kind-only
MAX_OFFSET_SET = 8
# distinct whole-binding shapes tracked before falling back to per-variable
MAX_SHAPES = 16

# Constraint encodings (hashable tuples):
#   ("literal", element_id)
#   ("offset", dcol, drow, kind_or_None)
#   ("offsets", frozenset[(dcol, drow)], kind_or_None)
#   ("kind", kind_or_None)
Constraint = tuple

# A shape is the whole argument tuple's offsets from the selection:
# ((dc0, dr0), (dc1, dr1), ...). Tracking shapes jointly (instead of each
# variable independently) avoids proposing cross-combinations of offsets
# never seen together in one binding, and pairing each shape with its own
# selection constraint keeps a shape observed only at fixed cells from
# wandering onto other cells where the same offsets happen to line up.
Shape = tuple

# rule: (selection constraint, shape) -- matched as a unit
Rule = tuple


@dataclass(frozen=True)
class BindingExample:
    state: WorkingState
    selection: str
    args: tuple[str, ...]

    def __post_init__(self):
        self.state.get(self.selection)
        for a in self.args:
            self.state.get(a)


@dataclass(frozen=True)
class MatchPattern:
    action_type: str
    selection: Constraint
    args: tuple[Constraint, ...]
    rules: tuple[Rule, ...] | None = None

    @property
    def arity(self) -> int:
        return len(self.args)

    def signature(self) -> tuple:
        return (self.action_type, self.selection, self.args, self.rules)


def induce_pattern(
    examples: Sequence[BindingExample],
    interface: InterfaceDefinition,
    action_type: str = UPDATE_FIELD,
) -> MatchPattern:
    """Least-general pattern covering every example."""
    if not examples:
        raise PatternError("need at least one binding example")
    arity = len(examples[0].args)
    for ex in examples:
        if len(ex.args) != arity:
            raise PatternError(
                f"inconsistent argument count: {len(ex.args)} vs {arity}"
            )

    sel_ids = [ex.selection for ex in examples]
    if len(set(sel_ids)) == 1:
        selection: Constraint = ("literal", sel_ids[0])
    else:
        kinds = {ex.state.get(ex.selection).kind for ex in examples}
        selection = ("kind", kinds.pop() if len(kinds) == 1 else None)

    args = []
    any_generalized = False
    for i in range(arity):
        ids = [ex.args[i] for ex in examples]
        if len(set(ids)) == 1:
            args.append(("literal", ids[0]))
            continue
        any_generalized = True
        offsets = set()
        kinds = set()
        for ex in examples:
            sel = ex.state.get(ex.selection)
            arg = ex.state.get(ex.args[i])
            offsets.add((arg.col - sel.col, arg.row - sel.row))
            kinds.add(arg.kind)
        kind = kinds.pop() if len(kinds) == 1 else None
        if len(offsets) == 1:
            dcol, drow = offsets.pop()
            args.append(("offset", dcol, drow, kind))
        elif len(offsets) <= MAX_OFFSET_SET:
            args.append(("offsets", frozenset(offsets), kind))
        else:
            args.append(("kind", kind))
    rules = None
    if arity and any_generalized:
        by_shape: dict[Shape, list[BindingExample]] = {}
        for ex in examples:
            sel = ex.state.get(ex.selection)
            shape = tuple(
                (ex.state.get(a).col - sel.col, ex.state.get(a).row - sel.row)
                for a in ex.args
            )
            by_shape.setdefault(shape, []).append(ex)
        if len(by_shape) <= MAX_SHAPES:
            rules = []
            for shape in sorted(by_shape):
                shape_sels = {ex.selection for ex in by_shape[shape]}
                if len(shape_sels) == 1:
                    rules.append((("literal", shape_sels.pop()), shape))
                else:
                    kinds = {
                        ex.state.get(ex.selection).kind for ex in by_shape[shape]
                    }
                    kind = kinds.pop() if len(kinds) == 1 else None
                    rules.append((("kind", kind), shape))
            rules = tuple(rules)
    return MatchPattern(
        action_type=action_type, selection=selection, args=tuple(args), rules=rules
    )


def generalize(pattern: MatchPattern, example: BindingExample) -> MatchPattern:
    """Fold one more example into an existing pattern (monotone)."""
    if len(example.args) != pattern.arity:
        raise PatternError(
            f"example has {len(example.args)} args, pattern expects {pattern.arity}"
        )
    sel_el = example.state.get(example.selection)
    selection = pattern.selection
    if selection[0] == "literal" and selection[1] != example.selection:
        selection = ("kind", sel_el.kind)
    elif selection[0] == "kind" and selection[1] not in (None, sel_el.kind):
        selection = ("kind", None)

    args = []
    shape = []
    for i, constraint in enumerate(pattern.args):
        arg_el = example.state.get(example.args[i])
        dcol, drow = arg_el.col - sel_el.col, arg_el.row - sel_el.row
        shape.append((dcol, drow))
        args.append(_widen(constraint, example.args[i], dcol, drow, arg_el.kind))
    # joint rules extend only when already tracked; a formerly all-literal
    # pattern cannot recover its original offsets here (no state at hand),
    # so it widens to per-variable semantics -- induce_pattern over the full
    # example list is the precise path and is what the agent uses
    rules = None
    if pattern.rules is not None:
        shape_t = tuple(shape)
        rules = []
        extended = False
        for sel_constraint, rshape in pattern.rules:
            if rshape == shape_t:
                extended = True
                if sel_constraint == ("literal", example.selection):
                    rules.append((sel_constraint, rshape))
                elif sel_constraint[0] == "literal":
                    rules.append((("kind", sel_el.kind), rshape))
                elif sel_constraint[1] in (None, sel_el.kind):
                    rules.append((sel_constraint, rshape))
                else:
                    rules.append((("kind", None), rshape))
            else:
                rules.append((sel_constraint, rshape))
        if not extended:
            rules.append((("literal", example.selection), shape_t))
        if len(rules) > MAX_SHAPES:
            rules = None
        else:
            rules = tuple(rules)
    return MatchPattern(pattern.action_type, selection, tuple(args), rules)


def _widen(constraint: Constraint, eid: str, dcol: int, drow: int, kind: str) -> Constraint:
    tag = constraint[0]
    if tag == "literal":
        if constraint[1] == eid:
            return constraint
        # literal cannot hold; offset information of the original example is
        # unknown here, so fall to kind-only (induce_pattern from the full
        # example list is preferred and keeps offsets)
        return ("kind", kind)
    if tag == "offset":
        k = constraint[3] if constraint[3] == kind else None
        if (constraint[1], constraint[2]) == (dcol, drow):
            return ("offset", dcol, drow, k)
        return ("offsets", frozenset({(constraint[1], constraint[2]), (dcol, drow)}), k)
    if tag == "offsets":
        k = constraint[2] if constraint[2] == kind else None
        merged = constraint[1] | {(dcol, drow)}
        if len(merged) <= MAX_OFFSET_SET:
            return ("offsets", merged, k)
        return ("kind", k)
    k = constraint[1] if constraint[1] == kind else None
    return ("kind", k)


def match_pattern(pattern: MatchPattern, state: WorkingState) -> list[tuple[str, tuple[str, ...]]]:
    """All (selection, args) bindings satisfying the pattern, sorted.

    Selection must be visible and unlocked, and blank for update_field
    skills; arguments must be visible and nonempty; all bound elements are
    pairwise distinct. With a shape set, argument tuples are drawn from the
    observed joint shapes and still checked against each variable's own
    constraint. Done states admit no bindings.
    """
    if state.done:
        return []
    out = set()
    if pattern.rules is not None:
        for sel_constraint, shape in pattern.rules:
            for sel in _candidates(sel_constraint, state, None):
                if sel.locked or not sel.visible:
                    continue
                if pattern.action_type == UPDATE_FIELD and not sel.blank:
                    continue
                combo = _shape_binding(pattern, shape, state, sel)
                if combo is not None:
                    out.add((sel.id, combo))
        return sorted(out)
    for sel in _candidates(pattern.selection, state, None):
        if sel.locked or not sel.visible:
            continue
        if pattern.action_type == UPDATE_FIELD and not sel.blank:
            continue
        pools = []
        ok = True
        for constraint in pattern.args:
            cands = [
                el
                for el in _candidates(constraint, state, sel)
                if el.visible and el.value != "" and el.kind != "button"
            ]
            if not cands:
                ok = False
                break
            pools.append(cands)
        if not ok:
            continue
        for combo in _distinct_products(pools, sel.id):
            out.add((sel.id, combo))
    return sorted(out)


def _shape_binding(pattern, shape, state, sel):
    ids = []
    for i, (dcol, drow) in enumerate(shape):
        el = state.at(sel.col + dcol, sel.row + drow)
        if (
            el is None
            or not el.visible
            or el.value == ""
            or el.kind == "button"
            or el.id == sel.id
            or el.id in ids
        ):
            return None
        if not _satisfies(pattern.args[i], el, sel):
            return None
        ids.append(el.id)
    return tuple(ids)


def _satisfies(constraint: Constraint, el, sel) -> bool:
    tag = constraint[0]
    if tag == "literal":
        return el.id == constraint[1]
    if tag == "offset":
        return (
            (el.col - sel.col, el.row - sel.row) == (constraint[1], constraint[2])
            and (constraint[3] is None or el.kind == constraint[3])
        )
    if tag == "offsets":
        return (el.col - sel.col, el.row - sel.row) in constraint[1] and (
            constraint[2] is None or el.kind == constraint[2]
        )
    return constraint[1] is None or el.kind == constraint[1]


def _candidates(constraint: Constraint, state: WorkingState, sel):
    tag = constraint[0]
    if tag == "literal":
        el = state.elements.get(constraint[1])
        return [el] if el is not None else []
    if tag == "offset":
        if sel is None:
            raise PatternError("offset constraint on the selection variable")
        el = state.at(sel.col + constraint[1], sel.row + constraint[2])
        if el is None:
            return []
        if constraint[3] is not None and el.kind != constraint[3]:
            return []
        return [el]
    if tag == "offsets":
        if sel is None:
            raise PatternError("offset constraint on the selection variable")
        out = []
        for dcol, drow in sorted(constraint[1]):
            el = state.at(sel.col + dcol, sel.row + drow)
            if el is None:
                continue
            if constraint[2] is not None and el.kind != constraint[2]:
                continue
            out.append(el)
        out.sort(key=lambda e: e.id)
        return out
    kind = constraint[1]
    return sorted(
        (el for el in state.elements.values() if kind is None or el.kind == kind),
        key=lambda e: e.id,
    )


def _distinct_products(pools, sel_id):
    """Cartesian product of candidate ids, all distinct and != selection."""
    def rec(i, chosen):
        if i == len(pools):
            yield tuple(chosen)
            return
        for el in pools[i]:
            if el.id == sel_id or el.id in chosen:
                continue
            chosen.append(el.id)
            yield from rec(i + 1, chosen)
            chosen.pop()

    yield from rec(0, [])
