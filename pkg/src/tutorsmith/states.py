"""Tutoring-interface state model: elements, working states, and actions.

All values are strings; numeric interpretation happens only inside the
formula machinery. States are immutable value objects so they can be shared
freely across evaluation workers and merged by content in behavior graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

KINDS = ("textfield", "button", "checkbox")

UPDATE_FIELD = "update_field"
PRESS_BUTTON = "press_button"
TOGGLE_CHECKBOX = "toggle_checkbox"

ACTION_TYPES = (UPDATE_FIELD, PRESS_BUTTON, TOGGLE_CHECKBOX)

# action type legal for each element kind
_KIND_FOR_ACTION = {
    UPDATE_FIELD: "textfield",
    PRESS_BUTTON: "button",
    TOGGLE_CHECKBOX: "checkbox",
}

CHECKED = "checked"


class StateError(ValueError):
    """Illegal state construction or transition."""


@dataclass(frozen=True)
class InterfaceElement:
    id: str
    kind: str
    col: int
    row: int
    value: str = ""
    locked: bool = False
    visible: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StateError(f"unknown element kind {self.kind!r}")
        if self.kind == "button" and self.value != "":
            raise StateError(f"button {self.id!r} cannot carry a value")
        if self.kind == "checkbox" and self.value not in ("", CHECKED):
            raise StateError(f"checkbox {self.id!r} value must be '' or 'checked'")

    @property
    def blank(self) -> bool:
        return self.value == ""


@dataclass(frozen=True)
class Action:
    """One concrete step: which element, what kind of action, what value."""

    selection: str
    action_type: str
    input: str = ""

    def __post_init__(self):
        if self.action_type not in ACTION_TYPES:
            raise StateError(f"unknown action type {self.action_type!r}")
        if self.action_type == PRESS_BUTTON and self.input != "":
            raise StateError("press_button takes no input")
        if self.action_type == TOGGLE_CHECKBOX and self.input != CHECKED:
            raise StateError("toggle_checkbox input must be 'checked'")

    def key(self) -> tuple:
        return (self.selection, self.action_type, self.input)


@dataclass(frozen=True)
class WorkingState:
    """Snapshot of every interface element at one problem step.

    Equality is element-wise value equality plus the done flag; the layout
    (kinds, grid positions, locked flags) is fixed per interface and does
    not participate.
    """

    elements: Mapping[str, InterfaceElement]
    done: bool = False
    done_button_id: str | None = field(default=None, compare=False)
    _sig: tuple = field(default=None, compare=False, repr=False)
    _grid: dict = field(default=None, compare=False, repr=False)

    def signature(self) -> tuple:
        """Hashable content identity used for node merging and caching."""
        if self._sig is None:
            sig = (self.done,) + tuple(
                (eid, el.value) for eid, el in sorted(self.elements.items())
            )
            object.__setattr__(self, "_sig", sig)
        return self._sig

    def __eq__(self, other):
        if not isinstance(other, WorkingState):
            return NotImplemented
        return self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    def get(self, eid: str) -> InterfaceElement:
        try:
            return self.elements[eid]
        except KeyError:
            raise StateError(f"no element {eid!r} in state") from None

    def value_of(self, eid: str) -> str:
        return self.get(eid).value

    def at(self, col: int, row: int) -> InterfaceElement | None:
        """Element at a grid cell, or None. Grids are sparse."""
        if self._grid is None:
            object.__setattr__(
                self, "_grid", {(el.col, el.row): el.id for el in self.elements.values()}
            )
        eid = self._grid.get((col, row))
        return self.elements[eid] if eid is not None else None


@dataclass(frozen=True)
class InterfaceDefinition:
    """Declarative description of one tutoring interface."""

    name: str
    elements: tuple[InterfaceElement, ...]
    done_button_id: str

    def __post_init__(self):
        seen = set()
        for el in self.elements:
            if el.id in seen:
                raise StateError(f"duplicate element id {el.id!r}")
            seen.add(el.id)
        by_id = {el.id: el for el in self.elements}
        if self.done_button_id not in by_id:
            raise StateError(f"done button {self.done_button_id!r} not defined")
        if by_id[self.done_button_id].kind != "button":
            raise StateError("done_button_id must refer to a button")

    def element(self, eid: str) -> InterfaceElement:
        for el in self.elements:
            if el.id == eid:
                return el
        raise StateError(f"no element {eid!r} in interface {self.name!r}")

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "name": self.name,
            "done_button_id": self.done_button_id,
            "elements": [
                {
                    "id": el.id,
                    "kind": el.kind,
                    "col": el.col,
                    "row": el.row,
                    "locked": el.locked,
                    "visible": el.visible,
                }
                for el in self.elements
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "InterfaceDefinition":
        if doc.get("format") != 1:
            raise StateError(f"unsupported interface format {doc.get('format')!r}")
        elements = tuple(
            InterfaceElement(
                id=e["id"],
                kind=e["kind"],
                col=e["col"],
                row=e["row"],
                locked=bool(e.get("locked", False)),
                visible=bool(e.get("visible", True)),
            )
            for e in doc["elements"]
        )
        return cls(name=doc["name"], elements=elements, done_button_id=doc["done_button_id"])

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "InterfaceDefinition":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def load_interface(defn: InterfaceDefinition, initial_values: Mapping[str, str]) -> WorkingState:
    """Build the start state: locked cells filled, everything else blank."""
    by_id = {el.id: el for el in defn.elements}
    for eid, value in initial_values.items():
        if eid not in by_id:
            raise StateError(f"initial value for unknown element {eid!r}")
        if not by_id[eid].locked:
            raise StateError(f"initial value supplied for unlocked element {eid!r}")
        if not isinstance(value, str):
            raise StateError(f"value for {eid!r} must be a string")
    elements = {}
    for el in defn.elements:
        value = initial_values.get(el.id, "")
        elements[el.id] = replace(el, value=value)
    return WorkingState(elements=elements, done=False, done_button_id=defn.done_button_id)


def apply_action(state: WorkingState, action: Action) -> WorkingState:
    """Pure state transition: returns a new state, never mutates the input."""
    if state.done:
        raise StateError("no actions are applicable after done")
    el = state.get(action.selection)
    if not el.visible:
        raise StateError(f"element {el.id!r} is not visible")
    if el.locked:
        raise StateError(f"element {el.id!r} is locked")
    if el.kind != _KIND_FOR_ACTION[action.action_type]:
        raise StateError(
            f"{action.action_type} cannot target {el.kind} element {el.id!r}"
        )
    if action.action_type == PRESS_BUTTON:
        finished = action.selection == _done_id(state)
        return WorkingState(
            elements=dict(state.elements),
            done=finished,
            done_button_id=state.done_button_id,
        )
    if action.action_type == TOGGLE_CHECKBOX:
        new_value = "" if el.value == CHECKED else CHECKED
    else:
        new_value = action.input
    elements = dict(state.elements)
    elements[action.selection] = replace(el, value=new_value)
    return WorkingState(elements=elements, done=False, done_button_id=state.done_button_id)


def _done_id(state: WorkingState) -> str | None:
    if state.done_button_id is not None:
        return state.done_button_id
    # states detached from their definition: a single button must be done
    buttons = [eid for eid, el in state.elements.items() if el.kind == "button"]
    if len(buttons) == 1:
        return buttons[0]
    return None


def blank_unlocked(state: WorkingState) -> WorkingState:
    """The problem's start state: locked cells kept, everything else blank."""
    elements = {
        eid: (el if el.locked else replace(el, value=""))
        for eid, el in state.elements.items()
    }
    return WorkingState(elements=elements, done=False, done_button_id=state.done_button_id)


def replay(start: WorkingState, actions: Iterable[Action]) -> WorkingState:
    state = start
    for action in actions:
        state = apply_action(state, action)
    return state
