"""Session-oriented authoring service: live tutoring over HTTP.

One logical writer per session; every mutation is an event appended to a
replayable log, and replaying the log into a fresh session reproduces the
live session's view byte for byte (corrections like removing a demo or
revising its explanation rebuild the agent by replay). get_view returns
everything the client renders; clients keep no learning logic.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException

from ..agent import Agent, AgentConfig, SkillApplication, generate_behavior_graph, state_id
from ..compose import explain
from ..domains import get_domain
from ..states import (
    CHECKED,
    PRESS_BUTTON,
    TOGGLE_CHECKBOX,
    UPDATE_FIELD,
    Action,
    InterfaceDefinition,
    StateError,
    WorkingState,
    apply_action,
    load_interface,
)
from .schemas import SCHEMA_VERSION, CreateSession, EventEnvelope

_ACTION_FOR_KIND = {
    "textfield": UPDATE_FIELD,
    "button": PRESS_BUTTON,
    "checkbox": TOGGLE_CHECKBOX,
}


class SessionError(HTTPException):
    def __init__(self, status: int, message: str):
        super().__init__(status_code=status, detail=message)


@dataclass
class Session:
    session_id: str
    config: dict
    setup: dict  # creation payload needed for replay
    agent: Agent = None
    start: WorkingState = None
    current: WorkingState = None
    # (state signature, action key) -> feedback state
    overlay: dict[tuple, str] = field(default_factory=dict)
    # replayable event log (post_event payload dicts)
    log: list[dict] = field(default_factory=list)
    # demo bookkeeping: demo_id -> index into log
    demo_ids: dict[str, int] = field(default_factory=dict)
    pending_explanations: list = field(default_factory=list)
    pending_demo_id: str | None = None
    problem_count: int = 0

    def proposals(self) -> list[SkillApplication]:
        return self.agent.act(self.current, start=self.start)


def _build_agent(config: dict) -> Agent:
    return Agent(
        AgentConfig(
            learner=config.get("learner", "stand"),
            htn=bool(config.get("htn", True)),
            seed=int(config.get("seed", 0)),
        )
    )


def _start_state(setup: dict) -> WorkingState:
    if setup.get("domain"):
        domain = get_domain(setup["domain"])
        operands = setup.get("operands")
        if operands is None:
            raise SessionError(422, "operands required for a built-in domain")
        problem = domain.make_problem(*operands)
        return domain.start_state(problem)
    if setup.get("interface"):
        try:
            defn = InterfaceDefinition.from_dict(setup["interface"])
            return load_interface(defn, setup.get("values") or {})
        except StateError as exc:
            raise SessionError(422, f"invalid interface definition: {exc}") from exc
    raise SessionError(422, "either a domain or an interface definition is required")


class SessionStore:
    def __init__(self):
        self.sessions: dict[str, Session] = {}

    def create(self, request: CreateSession) -> Session:
        setup = request.model_dump()
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            config=request.config,
            setup=setup,
        )
        session.agent = _build_agent(request.config)
        session.start = _start_state(setup)
        session.current = session.start
        session.problem_count = 1
        session.agent.begin_problem(f"session-p1", session.start)
        if request.agent:
            _replay_exported(session, request.agent)
        self.sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionError(404, f"no session {session_id}")
        return session


def _replay_exported(session: Session, doc: dict) -> None:
    if doc.get("format") != 1:
        raise SessionError(422, "unsupported agent document format")
    for event in doc.get("events", []):
        apply_event(session, event, replaying=True)


def apply_event(session: Session, event: dict, replaying: bool = False) -> None:
    kind = event.get("event")
    handler = _HANDLERS.get(kind)
    if handler is None:
        raise SessionError(422, f"unknown event kind {kind!r}")
    handler(session, event)
    if not replaying and kind not in ("select_explanation", "remove_demo"):
        session.log.append(event)


def _rebuild(session: Session) -> None:
    """Replay the (possibly edited) log into a fresh agent."""
    log = session.log
    session.agent = _build_agent(session.config)
    session.start = _start_state(session.setup)
    session.current = session.start
    session.overlay = {}
    session.demo_ids = {}
    session.pending_explanations = []
    session.pending_demo_id = None
    session.problem_count = 1
    session.agent.begin_problem("session-p1", session.start)
    session.log = []
    for event in log:
        apply_event(session, event, replaying=True)
        session.log.append(event)


def _element_action(session: Session, selection: str, input_value: str) -> Action:
    el = session.current.get(selection)
    action_type = _ACTION_FOR_KIND[el.kind]
    if action_type == TOGGLE_CHECKBOX:
        return Action(selection, action_type, CHECKED)
    if action_type == PRESS_BUTTON:
        return Action(selection, action_type, "")
    return Action(selection, action_type, input_value)


def _handle_demo(session: Session, event: dict) -> None:
    try:
        action = _element_action(session, event["selection"], event.get("input", ""))
    except StateError as exc:
        raise SessionError(422, str(exc)) from exc
    el = session.current.get(action.selection)
    if el.locked:
        raise SessionError(422, f"element {action.selection!r} is locked")
    demo_id = f"demo-{len(session.log)}"
    annotation: dict = {}
    session.pending_explanations = []
    session.pending_demo_id = None
    if action.action_type == UPDATE_FIELD:
        explanations = explain(
            session.current,
            action,
            arg_constraint=tuple(event["args"]) if event.get("args") else None,
            library=session.agent.config.library,
            depth=session.agent.config.search_depth,
        )
        if not explanations:
            raise SessionError(422, "no explanation reproduces this demonstration")
        choice = event.get("explanation_choice") or 0
        if choice >= len(explanations):
            raise SessionError(422, f"explanation choice {choice} out of range")
        chosen = explanations[choice]
        annotation = {
            "formula": chosen.composition.serialize(),
            "args": list(chosen.argument_bindings),
        }
        if len(explanations) > 1:
            session.pending_explanations = explanations
            session.pending_demo_id = demo_id
    try:
        session.agent.train_demo(session.current, action, annotation)
    except Exception as exc:
        raise SessionError(422, str(exc)) from exc
    session.overlay[(session.current.signature(), action.key())] = "demonstrated"
    session.demo_ids[demo_id] = len(session.log)


def _handle_feedback(session: Session, event: dict) -> None:
    app = next(
        (a for a in session.proposals() if a.app_id == event["app_id"]), None
    )
    if app is None:
        raise SessionError(409, f"stale or unknown application {event['app_id']!r}")
    label = event["label"] == "positive"
    session.agent.train_feedback(session.current, app, label)
    session.overlay[(session.current.signature(), app.key())] = (
        "positive" if label else "negative"
    )


def _handle_select_explanation(session: Session, event: dict) -> None:
    idx = session.demo_ids.get(event["demo_id"])
    if idx is None:
        raise SessionError(404, f"no demo {event['demo_id']!r}")
    edited = dict(session.log[idx])
    edited["explanation_choice"] = event["choice"]
    session.log[idx] = edited
    _rebuild(session)


def _handle_remove_demo(session: Session, event: dict) -> None:
    idx = session.demo_ids.get(event["demo_id"])
    if idx is None:
        raise SessionError(404, f"no demo {event['demo_id']!r}")
    del session.log[idx]
    _rebuild(session)


def _handle_move_on(session: Session, event: dict) -> None:
    sig = session.current.signature()
    to_apply = []
    for app in session.proposals():
        mark = session.overlay.get((sig, app.key()))
        if mark == "positive":
            to_apply.append(app.action)
    for (state_sig, key), mark in session.overlay.items():
        if state_sig == sig and mark == "demonstrated":
            action = Action(key[0], key[1], key[2])
            if action.key() not in {a.key() for a in to_apply}:
                to_apply.append(action)
    if not to_apply:
        raise SessionError(
            409, "move_on needs at least one positively graded or demonstrated action"
        )
    state = session.current
    for action in sorted(to_apply, key=lambda a: a.key()):
        state = apply_action(state, action)
    session.current = state


def _handle_goto_state(session: Session, event: dict) -> None:
    graph = generate_behavior_graph(session.agent, session.start, session.overlay)
    for nid, state in graph.nodes.items():
        if nid == event["node_id"]:
            session.current = state
            return
    raise SessionError(404, f"no node {event['node_id']!r} in the behavior graph")


def _handle_new_problem(session: Session, event: dict) -> None:
    setup = dict(session.setup)
    if event.get("operands") is not None:
        setup["operands"] = event["operands"]
    if event.get("values") is not None:
        setup["values"] = event["values"]
    session.setup = setup
    session.start = _start_state(setup)
    session.current = session.start
    session.problem_count += 1
    session.agent.begin_problem(f"session-p{session.problem_count}", session.start)
    session.pending_explanations = []
    session.pending_demo_id = None


_HANDLERS = {
    "demo": _handle_demo,
    "feedback": _handle_feedback,
    "select_explanation": _handle_select_explanation,
    "remove_demo": _handle_remove_demo,
    "move_on": _handle_move_on,
    "goto_state": _handle_goto_state,
    "new_problem": _handle_new_problem,
}


def get_view(session: Session) -> dict:
    sig = session.current.signature()
    applications = []
    demo_keys = {
        key for (state_sig, key), mark in session.overlay.items()
        if state_sig == sig and mark == "demonstrated"
    }
    proposed_keys = set()
    for app in session.proposals():
        proposed_keys.add(app.key())
        feedback = session.overlay.get((sig, app.key()), "unset")
        applications.append(
            {
                "app_id": app.app_id,
                "skill": app.skill_id,
                "label": f"f(x) {app.label}",
                "selection": app.selection,
                "args": list(app.args),
                "action_type": app.action.action_type,
                "input": app.action.input,
                "certainty_pct": round(app.certainty * 100),
                "certainty": app.certainty,
                "feedback": feedback,
                "group": app.group,
            }
        )
    for key in sorted(demo_keys - proposed_keys):
        applications.append(
            {
                "app_id": f"demo@{key[0]}",
                "skill": None,
                "label": "demonstration",
                "selection": key[0],
                "args": [],
                "action_type": key[1],
                "input": key[2],
                "certainty_pct": 100,
                "certainty": 1.0,
                "feedback": "demonstrated",
                "group": None,
            }
        )

    indicators = {}
    for app in applications:
        entry = indicators.setdefault(
            app["selection"], {"count": 0, "feedback": []}
        )
        entry["count"] += 1
        entry["feedback"].append(app["feedback"])
    indicator_out = []
    for element in sorted(indicators):
        marks = indicators[element]["feedback"]
        if any(m == "positive" for m in marks):
            color = "green"
        elif any(m in ("positive", "negative") for m in marks) and all(
            m == "negative" for m in marks if m in ("positive", "negative")
        ):
            color = "red"
        elif any(m == "demonstrated" for m in marks):
            color = "blue"
        else:
            color = "grey"
        indicator_out.append(
            {"element": element, "count": indicators[element]["count"], "state": color}
        )

    graph = generate_behavior_graph(session.agent, session.start, session.overlay)
    pending = [
        {
            "index": i,
            "display": e.display_with_values(session.current),
            "formula": e.composition.display(),
            "args": list(e.argument_bindings),
        }
        for i, e in enumerate(session.pending_explanations)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": session.session_id,
        "state": {
            "values": {
                eid: el.value for eid, el in sorted(session.current.elements.items())
            },
            "done": session.current.done,
            "layout": [
                {
                    "id": el.id,
                    "kind": el.kind,
                    "col": el.col,
                    "row": el.row,
                    "locked": el.locked,
                }
                for el in sorted(session.current.elements.values(), key=lambda e: e.id)
            ],
        },
        "applications": applications,
        "indicators": indicator_out,
        "pending_explanations": pending,
        "pending_demo_id": session.pending_demo_id,
        "graph": {**graph.to_dict(), "current": state_id(session.current)},
    }


def export_agent(session: Session) -> dict:
    return {
        "format": 1,
        "schema_version": SCHEMA_VERSION,
        "config": session.config,
        "setup": session.setup,
        "events": list(session.log),
        "skills": [
            {
                "id": s.skill_id,
                "label": s.label,
                "action_type": s.action_type,
                "formula": s.how_key,
                "examples": len(s.when_data),
            }
            for s in session.agent.skills_in_order()
        ],
        "htn": session.agent.htn.to_dict(),
    }


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="tutorsmith authoring service")
    store = store or SessionStore()
    app.state.store = store

    @app.post("/sessions")
    def create_session(request: CreateSession):
        session = store.create(request)
        return {"schema_version": SCHEMA_VERSION, "session_id": session.session_id}

    @app.get("/sessions/{session_id}/view")
    def view(session_id: str):
        return get_view(store.get(session_id))

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, envelope: EventEnvelope):
        session = store.get(session_id)
        apply_event(session, envelope.payload.model_dump())
        return get_view(session)

    @app.get("/sessions/{session_id}/agent")
    def export(session_id: str):
        return export_agent(store.get(session_id))

    @app.get("/sessions/{session_id}/graph")
    def graph(session_id: str):
        session = store.get(session_id)
        doc = generate_behavior_graph(session.agent, session.start, session.overlay).to_dict()
        return {"schema_version": SCHEMA_VERSION, **doc, "current": state_id(session.current)}

    return app
