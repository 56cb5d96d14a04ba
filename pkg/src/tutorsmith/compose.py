"""Function-composition search and evaluation over interface values.

A demonstrated value is explained by composing primitives (addition,
multiplication, digit isolation, copying) over the values of visible
interface elements. Compositions keep conversion plumbing implicit: leaves
are strings, arithmetic primitives parse them, and results are rendered
back to canonical strings (no leading zeros, integers without a decimal
point).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .states import UPDATE_FIELD, Action, WorkingState


class CompositionError(ValueError):
    """Structural problem: arity mismatch, unknown primitive, bad variable."""


class DomainError(ValueError):
    """A value fell outside a primitive's input domain (e.g. non-numeric)."""


def parse_number(text: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise DomainError(f"not a number: {text!r}") from None


def render_number(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def _digit(value: float, place: int) -> float:
    if value < 0 or value != int(value):
        raise DomainError(f"digit isolation needs a nonnegative integer, got {value}")
    return float((int(value) // place) % 10)


@dataclass(frozen=True)
class Primitive:
    name: str
    arity: int
    func: Callable[..., float]
    commutative: bool = False
    numeric: bool = True  # False: operates on raw strings (Copy)
    infix: str | None = None  # infix symbol for display, else functional

    def apply(self, args: Sequence[str]) -> str:
        if len(args) != self.arity:
            raise CompositionError(
                f"{self.name} takes {self.arity} arguments, got {len(args)}"
            )
        if not self.numeric:
            return self.func(*args)
        return render_number(self.func(*(parse_number(a) for a in args)))


_PRIMITIVES = {
    "Add": Primitive("Add", 2, lambda a, b: a + b, commutative=True, infix="+"),
    "Add3": Primitive("Add3", 3, lambda a, b, c: a + b + c, commutative=True, infix="+"),
    "Multiply": Primitive("Multiply", 2, lambda a, b: a * b, commutative=True, infix="*"),
    "OnesDigit": Primitive("OnesDigit", 1, lambda a: _digit(a, 1)),
    "TensDigit": Primitive("TensDigit", 1, lambda a: _digit(a, 10)),
    "Copy": Primitive("Copy", 1, lambda s: s, numeric=False),
}

DEFAULT_LIBRARY = ("Add", "Add3", "Multiply", "OnesDigit", "TensDigit", "Copy")


def get_primitive(name: str) -> Primitive:
    try:
        return _PRIMITIVES[name]
    except KeyError:
        raise CompositionError(f"unknown primitive {name!r}") from None


def resolve_library(names: Sequence[str]) -> tuple[Primitive, ...]:
    return tuple(get_primitive(n) for n in names)


# ---------------------------------------------------------------------------
# Expression trees


@dataclass(frozen=True)
class Var:
    index: int

    def serialize(self) -> str:
        return f"A{self.index}"


@dataclass(frozen=True)
class Call:
    primitive: str
    children: tuple

    def serialize(self) -> str:
        inner = ",".join(c.serialize() for c in self.children)
        return f"{self.primitive}({inner})"


Expr = Var | Call


@dataclass(frozen=True)
class FunctionComposition:
    """Expression tree over argument variables A0..Ak-1."""

    root: Expr

    def __post_init__(self):
        seen = _collect_vars(self.root)
        if seen and sorted(seen) != list(range(max(seen) + 1)):
            raise CompositionError(f"variable indices not contiguous: {sorted(seen)}")

    @property
    def arity(self) -> int:
        seen = _collect_vars(self.root)
        return max(seen) + 1 if seen else 0

    @property
    def depth(self) -> int:
        return _depth(self.root)

    def serialize(self) -> str:
        return self.root.serialize()

    @classmethod
    def parse(cls, text: str) -> "FunctionComposition":
        expr, rest = _parse_expr(text.strip())
        if rest:
            raise CompositionError(f"trailing input in composition: {rest!r}")
        return cls(expr)

    def display(self, substitutions: Sequence[str] | None = None) -> str:
        """Human form: conversions elided, Copy flattened, infix where natural."""
        subs = list(substitutions) if substitutions is not None else None
        return _display(self.root, subs, parent_infix=False)

    def __str__(self):
        return self.display()


def _collect_vars(node: Expr) -> set[int]:
    if isinstance(node, Var):
        return {node.index}
    out: set[int] = set()
    for c in node.children:
        out |= _collect_vars(c)
    return out


def _depth(node: Expr) -> int:
    if isinstance(node, Var):
        return 0
    return 1 + max(_depth(c) for c in node.children)


_VAR_NAMES = "ABCDEFGH"


def _display(node: Expr, subs, parent_infix: bool) -> str:
    if isinstance(node, Var):
        if subs is not None:
            return subs[node.index]
        return _VAR_NAMES[node.index] if node.index < len(_VAR_NAMES) else f"A{node.index}"
    prim = get_primitive(node.primitive)
    if prim.name == "Copy":
        return _display(node.children[0], subs, parent_infix)
    if prim.infix:
        parts = f" {prim.infix} ".join(
            _display(c, subs, parent_infix=True) for c in node.children
        )
        return f"({parts})" if parent_infix else parts
    inner = ", ".join(_display(c, subs, parent_infix=False) for c in node.children)
    return f"{prim.name}({inner})"


def _parse_expr(text: str):
    for i, ch in enumerate(text):
        if ch == "(":
            name = text[:i].strip()
            get_primitive(name)
            children = []
            rest = text[i + 1 :]
            while True:
                child, rest = _parse_expr(rest)
                children.append(child)
                rest = rest.lstrip()
                if rest.startswith(","):
                    rest = rest[1:]
                    continue
                if rest.startswith(")"):
                    return Call(name, tuple(children)), rest[1:]
                raise CompositionError(f"malformed composition near {rest!r}")
        if ch in ",)":
            token = text[:i].strip()
            return _parse_var(token), text[i:]
    return _parse_var(text.strip()), ""


def _parse_var(token: str) -> Var:
    if not token.startswith("A") or not token[1:].isdigit():
        raise CompositionError(f"bad variable token {token!r}")
    return Var(int(token[1:]))


# ---------------------------------------------------------------------------
# Evaluation


def eval_composition(comp: FunctionComposition, arg_values: Sequence[str]) -> str:
    """Evaluate a composition on argument value strings; deterministic."""
    if len(arg_values) < comp.arity:
        raise CompositionError(
            f"composition needs {comp.arity} values, got {len(arg_values)}"
        )
    return _eval(comp.root, arg_values)


def eval_intermediates(
    comp: FunctionComposition, arg_values: Sequence[str]
) -> list[tuple[str, str]]:
    """(path label, value) for every internal node, post-order, root last."""
    out: list[tuple[str, str]] = []

    def walk(node: Expr, path: str) -> str:
        if isinstance(node, Var):
            return arg_values[node.index]
        vals = [walk(c, f"{path}.{i}") for i, c in enumerate(node.children)]
        value = get_primitive(node.primitive).apply(vals)
        out.append((path or "root", value))
        return value

    walk(comp.root, "")
    return out


def _eval(node: Expr, arg_values: Sequence[str]) -> str:
    if isinstance(node, Var):
        value = arg_values[node.index]
        if not isinstance(value, str):
            raise CompositionError(f"argument values must be strings, got {value!r}")
        return value
    vals = [_eval(c, arg_values) for c in node.children]
    return get_primitive(node.primitive).apply(vals)


def simplify_display(comp: FunctionComposition, arg_values: Sequence[str]) -> str:
    """Human display with argument values substituted, e.g. '2 * 3'."""
    if len(arg_values) < comp.arity:
        raise CompositionError(
            f"composition needs {comp.arity} values, got {len(arg_values)}"
        )
    return comp.display(arg_values)


# ---------------------------------------------------------------------------
# Explanation search


@dataclass(frozen=True)
class Explanation:
    composition: FunctionComposition
    argument_bindings: tuple[str, ...]
    produced_value: str

    def display_with_values(self, state: WorkingState) -> str:
        values = [state.value_of(eid) for eid in self.argument_bindings]
        return self.composition.display(values)


def explain(
    state: WorkingState,
    demo: Action,
    arg_constraint: Sequence[str] | None = None,
    library: Sequence[str] = DEFAULT_LIBRARY,
    depth: int = 2,
) -> list[Explanation]:
    """All compositions up to the depth bound that reproduce the demo value.

    Candidate arguments are visible, nonempty, non-button elements; each
    explanation binds distinct elements. Commutative primitives are
    canonicalized by sorted binding id, so no two results differ only by
    argument order. The result is sorted by (depth, display, binding) and an
    empty list is a valid outcome.
    """
    if demo.action_type != UPDATE_FIELD or demo.input == "":
        raise CompositionError("only nonempty update_field demos are explainable")
    prims = resolve_library(library)
    sources = [
        (el.id, el.value)
        for el in sorted(state.elements.values(), key=lambda e: e.id)
        if el.visible and el.kind != "button" and el.value != ""
    ]
    if arg_constraint is not None:
        allowed = set(arg_constraint)
        sources = [s for s in sources if s[0] in allowed]

    results = []
    for tree, used in _enumerate_trees(sources, prims, depth):
        try:
            value = _eval_concrete(tree)
        except (DomainError, CompositionError):
            continue
        if value != demo.input:
            continue
        if arg_constraint is not None and set(used) != set(arg_constraint):
            continue
        if _has_identity_step(tree):
            continue
        comp, binding = _abstract(tree)
        results.append(Explanation(comp, binding, value))

    results.sort(
        key=lambda e: (
            e.composition.depth,
            e.display_with_values(state),
            e.argument_bindings,
        )
    )
    return results


# Concrete search trees: leaves are (element id, value) pairs.


def _enumerate_trees(sources, prims, max_depth):
    """Yield (tree, used element ids) for all canonical trees, depth 1..max."""
    # by_depth[d] = list of (tree, frozenset of element ids)
    by_depth: dict[int, list] = {0: [(("leaf", eid, val), frozenset([eid])) for eid, val in sources]}
    for d in range(1, max_depth + 1):
        level = []
        shallower = [t for dd in range(d) for t in by_depth[dd]]
        previous = by_depth[d - 1]
        for prim in prims:
            for combo in _child_combos(prim, shallower, previous):
                used = frozenset().union(*(u for _, u in combo))
                if len(used) != sum(len(u) for _, u in combo):
                    continue  # element reused across branches
                level.append((("call", prim.name, tuple(t for t, _ in combo)), used))
        by_depth[d] = level
        yield from level


def _child_combos(prim, shallower, previous):
    """Child tuples with at least one child from the previous depth level."""
    if prim.name == "Copy":
        # Copy explains a verbatim transcription of one element; wrapping
        # computed results would only duplicate them under the same display
        for item in previous:
            if item[0][0] == "leaf":
                yield (item,)
        return
    if prim.arity == 1:
        for item in previous:
            yield (item,)
        return
    if prim.commutative:
        pool = sorted(shallower, key=lambda iu: _tree_key(iu[0]))
        prev_keys = {_tree_key(t) for t, _ in previous}
        for combo in itertools.combinations(pool, prim.arity):
            if any(_tree_key(t) in prev_keys for t, _ in combo):
                yield combo
    else:
        for combo in itertools.product(shallower, repeat=prim.arity):
            if any(t in previous for t in combo):
                yield combo


def _tree_key(tree) -> tuple:
    if tree[0] == "leaf":
        return (0, tree[1])
    _, name, children = tree
    return (1, name) + tuple(_tree_key(c) for c in children)


def _eval_concrete(tree) -> str:
    if tree[0] == "leaf":
        return tree[2]
    _, name, children = tree
    vals = [_eval_concrete(c) for c in children]
    return get_primitive(name).apply(vals)


def _has_identity_step(tree, is_root: bool = True) -> bool:
    """A unary computation that returned its input verbatim adds nothing; a
    formula containing one is a redundant rewrite of a simpler formula.
    (A root Copy is exempt: being the identity is its whole point.)"""
    if tree[0] == "leaf":
        return False
    _, name, children = tree
    if len(children) == 1 and not (name == "Copy" and is_root):
        child_value = _eval_concrete(children[0])
        if get_primitive(name).apply([child_value]) == child_value:
            return True
    return any(_has_identity_step(c, is_root=False) for c in children)


def _abstract(tree) -> tuple[FunctionComposition, tuple[str, ...]]:
    """Replace leaves by variables numbered in left-to-right order."""
    binding: list[str] = []

    def walk(node):
        if node[0] == "leaf":
            binding.append(node[1])
            return Var(len(binding) - 1)
        _, name, children = node
        return Call(name, tuple(walk(c) for c in children))

    root = walk(tree)
    return FunctionComposition(root), tuple(binding)
