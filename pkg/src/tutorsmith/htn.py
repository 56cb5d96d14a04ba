"""Hierarchical task networks induced bottom-up from solution traces.

A method is an ordered sequence of groups; every group holds one or more
(skill, target) members, each possibly optional, and members of a group may
be consumed in any order. Traces (sequences of simultaneously-applied
groups) are merged into the structurally closest method: members absent on
one side become optional, reordered spans fuse into unordered groups, and
a trace that aligns with no method beyond the final step opens a new
(disjunctive) method under the root task. Whether an *optional* member is
taken is decided at execution time by its skill's own when-model, supplied
as a gate predicate; this is what makes conditional steps (like carrying)
work without per-method bookkeeping.

Recursion is out of scope: the task-reference graph stays acyclic, and
subtasks only arise from behavior-neutral factoring of shared spans.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from .states import CHECKED, PRESS_BUTTON, TOGGLE_CHECKBOX, Action, WorkingState, apply_action

Ref = tuple[str, str]  # (skill id, target element id)

MERGE_THRESHOLD = 0.5


class HtnError(ValueError):
    pass


@dataclass(frozen=True)
class Member:
    ref: Ref
    optional: bool = False


@dataclass(frozen=True)
class Group:
    members: tuple[Member, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members, key=lambda m: m.ref)))
        if len({m.ref for m in self.members}) != len(self.members):
            raise HtnError("duplicate member refs in one group")

    def refs(self) -> frozenset[Ref]:
        return frozenset(m.ref for m in self.members)

    def required_refs(self) -> frozenset[Ref]:
        return frozenset(m.ref for m in self.members if not m.optional)

    def member(self, ref: Ref) -> Member | None:
        for m in self.members:
            if m.ref == ref:
                return m
        return None


@dataclass(frozen=True)
class SubtaskItem:
    task: str


Item = Group | SubtaskItem


@dataclass(frozen=True)
class Method:
    method_id: str
    items: tuple[Item, ...]


@dataclass(frozen=True)
class TraceStep:
    skill_id: str
    selection: str
    args: tuple[str, ...] = ()
    input: str = ""
    action_type: str = "update_field"

    @property
    def ref(self) -> Ref:
        return (self.skill_id, self.selection)


# A trace is a sequence of groups of simultaneously demonstrated steps.
Trace = tuple[tuple[TraceStep, ...], ...]


def make_trace(groups: Sequence[Sequence[TraceStep]]) -> Trace:
    return tuple(tuple(sorted(g, key=lambda s: s.ref)) for g in groups)


@dataclass(frozen=True)
class Cursor:
    """Prefix-parse position: everything before `index` is closed."""

    method_id: str
    index: int
    consumed: frozenset[Ref] = frozenset()


class SkillResolver(Protocol):
    """What the HTN needs to know about skills, provided by the agent."""

    def action_type(self, skill_id: str) -> str: ...

    def comp_root(self, skill_id: str) -> str | None: ...

    def candidates_at(
        self, state: WorkingState, skill_id: str, target: str
    ) -> list[tuple[tuple[str, ...], str]]:
        """(args, produced value) for this skill's bindings at one target."""
        ...


@dataclass(frozen=True)
class HTN:
    tasks: dict[str, tuple[Method, ...]] = field(default_factory=lambda: {"root": ()})
    root: str = "root"
    retained: tuple[Trace, ...] = ()
    counter: int = 0

    def methods(self) -> tuple[Method, ...]:
        return self.tasks[self.root]

    def is_empty(self) -> bool:
        return not self.tasks[self.root]

    def expanded(self, method: Method) -> list[tuple[Group, str]]:
        """Flattened (group, group tag) sequence with subtasks inlined."""
        out: list[tuple[Group, str]] = []
        self._expand_items(method.items, method.method_id, out)
        return out

    def _expand_items(self, items, tag_prefix: str, out, depth: int = 0) -> None:
        if depth > 32:
            raise HtnError("task recursion detected")
        for item in items:
            if isinstance(item, SubtaskItem):
                methods = self.tasks.get(item.task, ())
                if len(methods) != 1:
                    raise HtnError(f"subtask {item.task} must have exactly one method")
                self._expand_items(methods[0].items, tag_prefix, out, depth + 1)
            else:
                out.append((item, f"{tag_prefix}:{len(out)}"))

    def method_by_id(self, method_id: str) -> Method:
        for m in self.methods():
            if m.method_id == method_id:
                return m
        raise HtnError(f"no method {method_id!r}")

    def all_skill_refs(self) -> set[Ref]:
        out: set[Ref] = set()
        for methods in self.tasks.values():
            for m in methods:
                for item in m.items:
                    if isinstance(item, Group):
                        out |= item.refs()
        return out

    def fingerprint(self) -> str:
        import hashlib
        import json

        doc = self.to_dict()
        doc.pop("counter", None)
        return hashlib.sha1(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]

    def assert_acyclic(self) -> None:
        seen: set[str] = set()

        def visit(task: str, stack: tuple[str, ...]) -> None:
            if task in stack:
                raise HtnError(f"task cycle: {' -> '.join(stack + (task,))}")
            for m in self.tasks.get(task, ()):
                for item in m.items:
                    if isinstance(item, SubtaskItem):
                        visit(item.task, stack + (task,))
            seen.add(task)

        visit(self.root, ())

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": 1,
            "root": self.root,
            "counter": self.counter,
            "tasks": {
                task: [
                    {
                        "id": m.method_id,
                        "items": [_item_to_dict(it) for it in m.items],
                    }
                    for m in methods
                ]
                for task, methods in sorted(self.tasks.items())
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HTN":
        if doc.get("format") != 1:
            raise HtnError(f"unsupported HTN format {doc.get('format')!r}")
        tasks = {
            task: tuple(
                Method(m["id"], tuple(_item_from_dict(it) for it in m["items"]))
                for m in methods
            )
            for task, methods in doc["tasks"].items()
        }
        return cls(tasks=tasks, root=doc["root"], counter=doc.get("counter", 0))


def _item_to_dict(item: Item) -> dict:
    if isinstance(item, SubtaskItem):
        return {"subtask": item.task}
    return {
        "group": [
            {"skill": m.ref[0], "target": m.ref[1], "optional": m.optional}
            for m in item.members
        ]
    }


def _item_from_dict(doc: dict) -> Item:
    if "subtask" in doc:
        return SubtaskItem(doc["subtask"])
    return Group(
        tuple(
            Member((m["skill"], m["target"]), bool(m.get("optional", False)))
            for m in doc["group"]
        )
    )


# ---------------------------------------------------------------------------
# Execution: eligibility, advancing, and parsing states into cursors


def eligible_items(
    htn: HTN,
    cursor: Cursor,
    state: WorkingState,
    precondition_gate: Callable[[Ref], bool] | None = None,
) -> list[tuple[Ref, str]]:
    """Skill refs executable next from the cursor, with their group tags.

    Unconsumed members of the open group are eligible; a group whose
    remaining members are all optional also exposes its successors. With a
    gate, an optional member that the gate accepts behaves as required
    (blocks successors) and one it rejects is skipped — this realizes
    conditional steps. Without a gate, both the optional item and its
    successor stay eligible.
    """
    method = htn.method_by_id(cursor.method_id)
    groups = htn.expanded(method)
    out: list[tuple[Ref, str]] = []
    consumed = cursor.consumed
    for gi in range(cursor.index, len(groups)):
        group, tag = groups[gi]
        blocking = False
        for member in group.members:
            if member.ref in consumed:
                continue
            out.append((member.ref, tag))
            if not member.optional:
                blocking = True
            elif precondition_gate is not None and precondition_gate(member.ref):
                blocking = True
        if blocking:
            break
        consumed = frozenset()
    return out


def strict_eligible(htn: HTN, cursor: Cursor) -> set[Ref]:
    """Unconsumed members of the first open group only: no optional
    skip-ahead. The tightest structural reading of what comes next."""
    method = htn.method_by_id(cursor.method_id)
    groups = htn.expanded(method)
    for gi in range(cursor.index, len(groups)):
        group, _ = groups[gi]
        consumed = cursor.consumed if gi == cursor.index else frozenset()
        remaining = {m.ref for m in group.members if m.ref not in consumed}
        if remaining:
            return remaining
    return set()


def advance(htn: HTN, cursor: Cursor, ref: Ref) -> Cursor:
    """Consume one eligible skill ref; commits past skipped optional groups."""
    method = htn.method_by_id(cursor.method_id)
    groups = htn.expanded(method)
    consumed = set(cursor.consumed)
    gi = cursor.index
    while gi < len(groups):
        group, _ = groups[gi]
        member = group.member(ref)
        if member is not None and ref not in consumed:
            consumed.add(ref)
            if consumed >= group.refs():
                return Cursor(cursor.method_id, gi + 1, frozenset())
            return Cursor(cursor.method_id, gi, frozenset(consumed))
        remaining = {m.ref for m in group.members if m.ref not in consumed}
        if all(group.member(r).optional for r in remaining):
            gi += 1
            consumed = set()
            continue
        raise HtnError(f"skill {ref} is not eligible at {cursor}")
    raise HtnError(f"skill {ref} is not eligible at {cursor}")


def parse_state(
    htn: HTN,
    state: WorkingState,
    start: WorkingState,
    resolver: SkillResolver,
) -> list[Cursor]:
    """All method cursors whose prefix parse reproduces the state's content."""
    out = []
    for method in htn.methods():
        cursor = _parse_method(htn, method, state, start, resolver)
        if cursor is not None:
            out.append(cursor)
    return out


def _parse_method(htn, method, state, start, resolver) -> Cursor | None:
    groups = htn.expanded(method)
    remaining: dict[str, str] = {}
    for eid, el in state.elements.items():
        if not el.locked and el.value != "":
            remaining[eid] = el.value
    done_pending = state.done
    sim = start
    for gi, (group, _) in enumerate(groups):
        consumed: set[Ref] = set()
        progress = True
        while progress:
            progress = False
            for member in group.members:
                if member.ref in consumed:
                    continue
                skill_id, target = member.ref
                action_type = resolver.action_type(skill_id)
                if action_type == PRESS_BUTTON:
                    if done_pending and not remaining:
                        sim = apply_action(sim, Action(target, PRESS_BUTTON, ""))
                        done_pending = False
                        consumed.add(member.ref)
                        progress = True
                elif action_type == TOGGLE_CHECKBOX:
                    if remaining.get(target) == CHECKED:
                        sim = apply_action(sim, Action(target, TOGGLE_CHECKBOX, CHECKED))
                        del remaining[target]
                        consumed.add(member.ref)
                        progress = True
                else:
                    value = remaining.get(target)
                    if value is not None and any(
                        v == value for _, v in resolver.candidates_at(sim, skill_id, target)
                    ):
                        sim = apply_action(sim, Action(target, "update_field", value))
                        del remaining[target]
                        consumed.add(member.ref)
                        progress = True
        required_open = bool(group.required_refs() - consumed)
        fully_done = not remaining and not done_pending
        if required_open:
            if not fully_done:
                return None
            return Cursor(method.method_id, gi, frozenset(consumed))
        if fully_done:
            return Cursor(method.method_id, gi, frozenset(consumed))
    if remaining or done_pending:
        return None
    return Cursor(method.method_id, len(groups), frozenset())


def parses_trace(htn: HTN, trace: Trace) -> bool:
    """Structural check: can some root method generate this trace?"""
    return any(_match_trace(htn, m, trace) for m in htn.methods())


def _match_trace(htn: HTN, method: Method, trace: Trace) -> bool:
    groups = [g for g, _ in htn.expanded(method)]
    gi = 0
    consumed: set[Ref] = set()
    for tgroup in trace:
        pending = [s.ref for s in tgroup]
        while pending:
            made_progress = False
            for ref in list(pending):
                if gi < len(groups) and ref in groups[gi].refs() and ref not in consumed:
                    consumed.add(ref)
                    pending.remove(ref)
                    made_progress = True
            if pending and not made_progress:
                if gi < len(groups) and not (groups[gi].required_refs() - consumed):
                    gi += 1
                    consumed = set()
                else:
                    return False
    while gi < len(groups):
        if groups[gi].required_refs() - consumed:
            return False
        gi += 1
        consumed = set()
    return True


# ---------------------------------------------------------------------------
# Induction: merging traces into methods


def induce(htn: HTN, trace: Trace, resolver: SkillResolver) -> HTN:
    """Fold one completed trace into the HTN; returns a new HTN.

    The merged (or newly created) method parses the trace, every previously
    retained trace keeps parsing, and the task graph stays acyclic.
    """
    return induce_with_method(htn, trace, resolver)[0]


def induce_with_method(
    htn: HTN, trace: Trace, resolver: SkillResolver
) -> tuple[HTN, str]:
    """induce() plus the id of the method that absorbed the trace."""
    if not trace:
        raise HtnError("cannot induce from an empty trace")
    trace = make_trace(trace)
    best: tuple[tuple[float, float], Method, list] | None = None
    for method in htn.methods():
        score, ops = _align(htn, method, trace, resolver)
        coverage = _mutual_coverage(htn, method, trace, ops)
        # merge only when a strict majority of BOTH sides' groups align;
        # a shared final step alone (every method ends with done) must not
        # glue distinct procedures together
        if coverage > MERGE_THRESHOLD:
            if best is None or (coverage, score) > best[0]:
                best = ((coverage, score), method, ops)
    counter = htn.counter
    if best is None:
        counter += 1
        method = Method(f"m{counter}", _method_items_from_trace(trace))
        methods = htn.tasks[htn.root] + (method,)
        chosen = method.method_id
    else:
        merged = _merge(htn, best[1], trace, best[2])
        methods = tuple(
            merged if m.method_id == best[1].method_id else m for m in htn.methods()
        )
        chosen = best[1].method_id
    tasks = dict(htn.tasks)
    tasks[htn.root] = methods
    out = HTN(
        tasks=tasks,
        root=htn.root,
        retained=htn.retained + (trace,),
        counter=counter,
    )
    out = _factor_subtasks(out)
    out.assert_acyclic()
    for old in out.retained:
        if not parses_trace(out, old):
            raise HtnError("induction regression: a retained trace no longer parses")
    return out, chosen


def _method_items_from_trace(trace: Trace) -> tuple[Item, ...]:
    return tuple(
        Group(tuple(Member(step.ref) for step in tgroup)) for tgroup in trace
    )


def _member_sim(htn_member: Ref, trace_ref: Ref, resolver: SkillResolver) -> float:
    if htn_member == trace_ref:
        return 1.0
    skill_a, target_a = htn_member
    skill_b, target_b = trace_ref
    if target_a != target_b:
        return 0.0
    if resolver.action_type(skill_a) != resolver.action_type(skill_b):
        return 0.0
    root_a, root_b = resolver.comp_root(skill_a), resolver.comp_root(skill_b)
    return 1.0 if root_a == root_b and root_a is not None else 0.0


def _group_sim(group: Group, tgroup: tuple[TraceStep, ...], resolver) -> float:
    if not group.members or not tgroup:
        return 0.0
    total = 0.0
    used: set[Ref] = set()
    for step in tgroup:
        best, best_ref = 0.0, None
        for member in group.members:
            if member.ref in used:
                continue
            sim = _member_sim(member.ref, step.ref, resolver)
            if sim > best:
                best, best_ref = sim, member.ref
        if best_ref is not None:
            used.add(best_ref)
            total += best
    return total / max(len(group.members), len(tgroup))


def _align(htn, method, trace, resolver):
    """Needleman-Wunsch over (method groups x trace groups), zero gap cost.

    Returns (normalized score, ops) where ops is a list of
    ("match", gi, tj, sim) / ("mgap", gi) / ("tgap", tj) in order.
    """
    groups = [g for g, _ in htn.expanded(method)]
    n, m = len(groups), len(trace)
    sims = [[_group_sim(groups[i], trace[j], resolver) for j in range(m)] for i in range(n)]
    NEG = float("-inf")
    dp = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            diag = dp[i - 1][j - 1] + sims[i - 1][j - 1] if sims[i - 1][j - 1] > 0 else NEG
            dp[i][j] = max(diag, dp[i - 1][j], dp[i][j - 1])
    ops: list[tuple] = []
    i, j = n, m
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and sims[i - 1][j - 1] > 0
            and dp[i][j] == dp[i - 1][j - 1] + sims[i - 1][j - 1]
        ):
            ops.append(("match", i - 1, j - 1, sims[i - 1][j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j]:
            ops.append(("mgap", i - 1))
            i -= 1
        else:
            ops.append(("tgap", j - 1))
            j -= 1
    ops.reverse()
    score = dp[n][m] / max(n, m, 1)
    return score, ops


def _mutual_coverage(htn: HTN, method: Method, trace: Trace, ops) -> float:
    """min over both sides of the fraction of groups the alignment matched."""
    n_method = len(htn.expanded(method))
    matched = sum(1 for op in ops if op[0] == "match")
    if not n_method or not trace:
        return 0.0
    return min(matched / n_method, matched / len(trace))


def _merge(htn: HTN, method: Method, trace: Trace, ops) -> Method:
    """Apply one aligned trace to a method, generalizing least first."""
    groups = [g for g, _ in htn.expanded(method)]
    ops = _repair_reorders(groups, trace, ops)
    new_items: list[Group] = []
    for k, op in enumerate(ops):
        if op[0] == "fuse":
            _, mis, tjs = op
            members: dict[Ref, Member] = {}
            for mi in mis:
                for member in groups[mi].members:
                    members.setdefault(member.ref, member)
            new_items.append(Group(tuple(members.values())))
        elif op[0] == "match":
            _, mi, tj, _ = op
            new_items.append(_merge_group(groups[mi], trace[tj]))
        elif op[0] == "mgap":
            mi = op[1]
            new_items.append(
                Group(tuple(Member(m.ref, optional=True) for m in groups[mi].members))
            )
        else:  # tgap: insert unless an adjacent method group already covers it
            tj = op[1]
            refs = {s.ref for s in trace[tj]}
            neighbors = []
            if new_items:
                neighbors.append(new_items[-1])
            nxt = _next_method_group(ops, k, groups)
            if nxt is not None:
                neighbors.append(nxt)
            if any(refs <= g.refs() for g in neighbors):
                continue
            new_items.append(
                Group(tuple(Member(ref, optional=True) for ref in sorted(refs)))
            )
    return Method(method.method_id, tuple(new_items))


def _next_method_group(ops, k, groups) -> Group | None:
    for op in ops[k + 1 :]:
        if op[0] in ("match", "mgap"):
            return groups[op[1]]
        if op[0] == "fuse":
            return groups[op[1][0]]
    return None


def _merge_group(group: Group, tgroup: tuple[TraceStep, ...]) -> Group:
    trace_refs = {s.ref for s in tgroup}
    members: list[Member] = []
    for member in group.members:
        if member.ref in trace_refs or member.optional:
            members.append(member)
        else:
            members.append(Member(member.ref, optional=True))
    known = {m.ref for m in members}
    for ref in sorted(trace_refs - known):
        members.append(Member(ref, optional=True))
    return Group(tuple(members))


def _repair_reorders(groups, trace, ops):
    """Fuse windows of cross-placed refs into unordered groups.

    An op is reorder evidence when its two sides cannot be reconciled
    positionally: a gap whose refs appear on the other sequence, or a match
    whose trace refs spill outside the matched method group. The minimal
    window spanning a cluster of evidence fuses iff both sides hold the
    same ref multiset; interior clean matches split the window when both
    halves balance on their own.
    """
    method_refs = [sorted(g.refs()) for g in groups]
    trace_refs = [sorted(s.ref for s in t) for t in trace]
    all_method = {r for refs in method_refs for r in refs}
    all_trace = {r for refs in trace_refs for r in refs}

    def is_evidence(op) -> bool:
        if op[0] == "match":
            return not (set(trace_refs[op[2]]) <= set(method_refs[op[1]]))
        if op[0] == "mgap":
            return any(r in all_trace for r in method_refs[op[1]])
        return any(r in all_method for r in trace_refs[op[1]])

    flags = [is_evidence(op) for op in ops]
    if not any(flags):
        return ops
    lo = flags.index(True)
    hi = len(flags) - 1 - flags[::-1].index(True)
    return ops[:lo] + _fuse_window(ops[lo : hi + 1], flags[lo : hi + 1],
                                   method_refs, trace_refs) + ops[hi + 1 :]


def _window_sides(ops, method_refs, trace_refs):
    m: list = []
    t: list = []
    for op in ops:
        if op[0] == "match":
            m.extend(method_refs[op[1]])
            t.extend(trace_refs[op[2]])
        elif op[0] == "mgap":
            m.extend(method_refs[op[1]])
        else:
            t.extend(trace_refs[op[1]])
    return sorted(m), sorted(t)


def _fuse_window(ops, flags, method_refs, trace_refs):
    m_side, t_side = _window_sides(ops, method_refs, trace_refs)
    if m_side != t_side:
        return list(ops)
    # prefer splitting at interior clean matches so independent reordered
    # spans fuse separately
    for k, (op, ev) in enumerate(zip(ops, flags)):
        if ev or op[0] != "match" or k == 0 or k == len(ops) - 1:
            continue
        left_m, left_t = _window_sides(ops[:k], method_refs, trace_refs)
        if left_m == left_t:
            return (
                _fuse_window(ops[:k], flags[:k], method_refs, trace_refs)
                + [op]
                + _fuse_window(ops[k + 1 :], flags[k + 1 :], method_refs, trace_refs)
            )
    mis = [op[1] for op in ops if op[0] in ("match", "mgap")]
    tjs = [op[2] if op[0] == "match" else op[1] for op in ops if op[0] != "mgap"]
    if len(mis) == 1 and len(tjs) == 1:
        return list(ops)
    return [("fuse", mis, tjs)]


def _factor_subtasks(htn: HTN) -> HTN:
    """Extract spans of >=2 identical consecutive items shared by >=2 methods."""
    counter = htn.counter
    tasks = dict(htn.tasks)
    while True:
        methods = tasks[htn.root]
        span = _find_shared_span(methods)
        if span is None:
            break
        counter += 1
        task_id = f"t{counter}"
        sub = Method(f"{task_id}_m", span)
        tasks[task_id] = (sub,)
        tasks[htn.root] = tuple(_replace_span(m, span, task_id) for m in methods)
    if counter == htn.counter:
        return htn
    return HTN(tasks=tasks, root=htn.root, retained=htn.retained, counter=counter)


def _find_shared_span(methods) -> tuple[Item, ...] | None:
    best: tuple[Item, ...] | None = None
    for a_idx in range(len(methods)):
        items_a = methods[a_idx].items
        for start in range(len(items_a)):
            for end in range(start + 2, len(items_a) + 1):
                span = items_a[start:end]
                if any(isinstance(it, SubtaskItem) for it in span):
                    continue
                holders = sum(1 for m in methods if _contains_span(m.items, span))
                if holders >= 2 and (best is None or len(span) > len(best)):
                    best = span
    return best


def _contains_span(items: tuple[Item, ...], span: tuple[Item, ...]) -> bool:
    for i in range(len(items) - len(span) + 1):
        if items[i : i + len(span)] == span:
            return True
    return False


def _replace_span(method: Method, span: tuple[Item, ...], task_id: str) -> Method:
    items = list(method.items)
    i = 0
    out: list[Item] = []
    while i < len(items):
        if tuple(items[i : i + len(span)]) == span:
            out.append(SubtaskItem(task_id))
            i += len(span)
        else:
            out.append(items[i])
            i += 1
    return Method(method.method_id, tuple(out))
