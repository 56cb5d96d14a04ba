"""Feature preparation for when-learning.

Features are restated relative to the selection and argument variables of a
candidate skill application, plus a full snapshot of the grid, the
candidate's computed output, every intermediate value of its formula, and
value-equality relations. Numeric and symbolic readings of a value are kept
in separate features so trees can threshold numbers and test symbols.

Missing numerics are encoded as an explicit ABSENT marker distinct from any
observed value.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from ..compose import FunctionComposition, eval_intermediates
from ..states import WorkingState

ABSENT = None

_DIRS = (("up", 0, -1), ("down", 0, 1), ("left", -1, 0), ("right", 1, 0))


def _num(value: str):
    if value == "":
        return ABSENT
    try:
        return float(value)
    except ValueError:
        return ABSENT


def _sym(value: str):
    """Symbolic reading: only for values with no numeric reading."""
    if value == "":
        return ABSENT
    try:
        float(value)
        return ABSENT
    except ValueError:
        return value


def _var_features(out: dict, state: WorkingState, prefix: str, eid: str):
    el = state.get(eid)
    out[f"{prefix}.blank"] = el.value == ""
    out[f"{prefix}.num"] = _num(el.value)
    out[f"{prefix}.sym"] = _sym(el.value)
    neighbor_vals = {}
    for dname, dc, dr in _DIRS:
        nb = state.at(el.col + dc, el.row + dr)
        out[f"{prefix}.{dname}.exists"] = nb is not None
        if nb is None:
            out[f"{prefix}.{dname}.blank"] = ABSENT
            out[f"{prefix}.{dname}.num"] = ABSENT
            out[f"{prefix}.{dname}.sym"] = ABSENT
            neighbor_vals[dname] = ""
        else:
            out[f"{prefix}.{dname}.blank"] = nb.value == ""
            out[f"{prefix}.{dname}.num"] = _num(nb.value)
            out[f"{prefix}.{dname}.sym"] = _sym(nb.value)
            neighbor_vals[dname] = nb.value
    out[f"eq.{prefix}.lr"] = _eq(neighbor_vals["left"], neighbor_vals["right"])
    out[f"eq.{prefix}.ud"] = _eq(neighbor_vals["up"], neighbor_vals["down"])
    return neighbor_vals


def _eq(a: str, b: str) -> bool:
    return a != "" and b != "" and a == b


def state_features(state: WorkingState, include_given_numbers: bool = False) -> dict:
    """Whole-grid snapshot; also the feature map for method preconditions.

    Deliberately value-free for numbers (blankness, symbols, and equality
    between aligned cells): raw cell values would let trees memorize operand
    combinations and claim full certainty on unseen ones. Skills without
    argument variables opt into the given (locked) cells' numeric values,
    since the grid is their only input.
    """
    out: dict = {"done": state.done}
    ids = sorted(state.elements)
    for eid in ids:
        el = state.elements[eid]
        out[f"cell.{eid}.blank"] = el.value == ""
        out[f"cell.{eid}.sym"] = _sym(el.value)
        if include_given_numbers and el.locked:
            out[f"cell.{eid}.num"] = _num(el.value)
    # equality only between aligned given cells: equalities involving cells
    # filled during solving vary with solution progress and operand draws,
    # which makes them coincidental separators on small data
    locked = [eid for eid in ids if state.elements[eid].locked]
    for i, a in enumerate(locked):
        ea = state.elements[a]
        for b in locked[i + 1 :]:
            eb = state.elements[b]
            if ea.row == eb.row or ea.col == eb.col:
                out[f"eq.cell.{a}.{b}"] = _eq(ea.value, eb.value)
    return out


def extract_features(
    state: WorkingState,
    selection: str,
    args: Sequence[str],
    how: FunctionComposition | None,
    output: str | None,
) -> dict:
    """Deterministic feature map for one candidate (selection, args) binding.

    Every candidate sees the value-free grid snapshot (blankness for
    solution progress, locked symbols and locked-pair equalities for the
    problem's given context) plus features restated relative to the
    selection and argument variables, where the numeric readings live.
    Constant-action skills additionally read the given cells' numbers.
    """
    out = state_features(state, include_given_numbers=not args)
    sel = state.get(selection)
    max_col = max(el.col for el in state.elements.values())
    out["sel.col_from_right"] = float(max_col - sel.col)
    out["sel.row_from_top"] = float(sel.row)
    _var_features(out, state, "sel", selection)

    arg_vals = [state.value_of(a) for a in args]
    neighbor_vals = {}
    for i, a in enumerate(args):
        el = state.get(a)
        out[f"arg{i}.dcol"] = float(el.col - sel.col)
        out[f"arg{i}.drow"] = float(el.row - sel.row)
        neighbor_vals[i] = _var_features(out, state, f"arg{i}", a)
    for i in range(len(args)):
        for j in range(i + 1, len(args)):
            out[f"eq.arg{i}.arg{j}"] = _eq(arg_vals[i], arg_vals[j])
            for dname, _, _ in _DIRS:
                out[f"eq.arg{i}.arg{j}.{dname}"] = _eq(
                    neighbor_vals[i][dname], neighbor_vals[j][dname]
                )

    if how is not None and output is not None:
        out["out.num"] = _num(output)
        out["out.sym"] = _sym(output)
        inters = eval_intermediates(how, arg_vals)
        for k, (_, value) in enumerate(inters[:-1]):
            out[f"inter{k}.num"] = _num(value)
    return out
