"""Wire schemas for the authoring service. Every payload carries schema_version."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1


class CreateSession(BaseModel):
    schema_version: int = SCHEMA_VERSION
    domain: str | None = None
    operands: list | None = None
    interface: dict | None = None
    values: dict[str, str] | None = None
    config: dict = Field(default_factory=dict)
    agent: dict | None = None  # resume from an exported agent document


class DemoEvent(BaseModel):
    event: Literal["demo"] = "demo"
    selection: str
    input: str = ""
    args: list[str] | None = None
    explanation_choice: int | None = None


class FeedbackEvent(BaseModel):
    event: Literal["feedback"] = "feedback"
    app_id: str
    label: Literal["positive", "negative"]


class SelectExplanationEvent(BaseModel):
    event: Literal["select_explanation"] = "select_explanation"
    demo_id: str
    choice: int


class RemoveDemoEvent(BaseModel):
    event: Literal["remove_demo"] = "remove_demo"
    demo_id: str


class MoveOnEvent(BaseModel):
    event: Literal["move_on"] = "move_on"


class GotoStateEvent(BaseModel):
    event: Literal["goto_state"] = "goto_state"
    node_id: str


class NewProblemEvent(BaseModel):
    event: Literal["new_problem"] = "new_problem"
    operands: list | None = None
    values: dict[str, str] | None = None


class EventEnvelope(BaseModel):
    schema_version: int = SCHEMA_VERSION
    payload: (
        DemoEvent
        | FeedbackEvent
        | SelectExplanationEvent
        | RemoveDemoEvent
        | MoveOnEvent
        | GotoStateEvent
        | NewProblemEvent
    ) = Field(discriminator="event")
