"""Record view payloads from the authoring service for the UI contract tests.

Covers the canonical scenarios: a fraction-multiply session with two
demonstrations and graded proposals on a follow-up problem (the multiply
figures), the conversion problem 5/6 + 2/3, and the multicolumn-addition
carry state of 189+542 with mixed feedback. Each fixture stores the exact
get_view payloads around one interaction so the client tests can replay the
exchange offline.
"""

import json
import pathlib
import sys

from fastapi.testclient import TestClient

from tutorsmith.api.service import create_app

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def post(client, sid, payload):
    response = client.post(
        f"/sessions/{sid}/events", json={"schema_version": 1, "payload": payload}
    )
    response.raise_for_status()
    return response.json()


def view(client, sid):
    return client.get(f"/sessions/{sid}/view").json()


def make_session(client, domain, operands):
    response = client.post(
        "/sessions",
        json={
            "schema_version": 1,
            "domain": domain,
            "operands": operands,
            "config": {"learner": "stand", "htn": True, "seed": 0},
        },
    )
    response.raise_for_status()
    return response.json()["session_id"]


def scenario_multiply(client):
    """Two demos on 4/5 x 8/3, then graded proposals on 2/7 x 3/5."""
    sid = make_session(client, "fractions", [4, 5, "x", 8, 3])
    post(client, sid, {"event": "demo", "selection": "ans_den", "input": "15",
                       "args": ["den1", "den2"]})
    demo_view = post(client, sid, {"event": "demo", "selection": "ans_num", "input": "32",
                                   "args": ["num1", "num2"]})
    post(client, sid, {"event": "move_on"})
    solved = post(client, sid, {"event": "demo", "selection": "done", "input": ""})
    post(client, sid, {"event": "move_on"})
    fresh = post(client, sid, {"event": "new_problem", "operands": [2, 7, "x", 3, 5]})
    proposals = [a for a in fresh["applications"] if a["feedback"] == "unset"]
    before = fresh
    after = None
    graded_id = None
    if proposals:
        graded_id = proposals[0]["app_id"]
        after = post(client, sid, {"event": "feedback", "app_id": graded_id,
                                   "label": "positive"})
    return {
        "name": "fraction_multiply",
        "demo_view": demo_view,
        "before_feedback": before,
        "feedback_app_id": graded_id,
        "after_feedback": after,
    }


def scenario_convert(client):
    sid = make_session(client, "fractions", [5, 6, "+", 2, 3])
    post(client, sid, {"event": "demo", "selection": "convert_box", "input": ""})
    v = view(client, sid)
    return {"name": "fraction_convert", "start_view": v}


def author_problem(client, sid, domain, problem):
    """Author one problem the way a careful user would: grade every proposal,
    demonstrate whatever is missing (picking the right explanation from the
    dropdown), then move on group by group."""
    from tutorsmith.states import apply_action

    state = domain.start_state(problem)
    while not state.done:
        steps = {s.key(): s for s in domain.correct_steps(problem, state)}
        while True:
            current = view(client, sid)
            pending = [a for a in current["applications"] if a["feedback"] == "unset"]
            if not pending:
                break
            app = pending[0]
            key = (app["selection"], app["action_type"], app["input"])
            post(client, sid, {
                "event": "feedback", "app_id": app["app_id"],
                "label": "positive" if key in steps else "negative",
            })
        current = view(client, sid)
        covered = {
            (a["selection"], a["action_type"], a["input"])
            for a in current["applications"]
            if a["feedback"] in ("positive", "demonstrated")
        }
        for key, step in sorted(steps.items()):
            if key in covered:
                continue
            after = post(client, sid, {
                "event": "demo", "selection": step.action.selection,
                "input": step.action.input, "args": list(step.args) or None,
            })
            if after["pending_demo_id"] and step.formula is not None:
                choice = next(
                    (o["index"] for o in after["pending_explanations"]
                     if o["args"] == list(step.args)
                     and _serialized(o["formula"]) == step.formula),
                    None,
                )
                if choice is not None:
                    post(client, sid, {
                        "event": "select_explanation",
                        "demo_id": after["pending_demo_id"],
                        "choice": choice,
                    })
        post(client, sid, {"event": "move_on"})
        for step in steps.values():
            state = apply_action(state, step.action)


_DISPLAY_TO_SERIAL = {}


def _serialized(display_formula: str) -> str:
    """Map a display formula like 'OnesDigit(A + B)' back to its serialization."""
    if not _DISPLAY_TO_SERIAL:
        from tutorsmith.compose import FunctionComposition

        for text in (
            "Add(A0,A1)", "Add3(A0,A1,A2)", "Multiply(A0,A1)", "Copy(A0)",
            "OnesDigit(Add(A0,A1))", "OnesDigit(Add3(A0,A1,A2))",
            "TensDigit(Add(A0,A1))", "TensDigit(Add3(A0,A1,A2))",
        ):
            comp = FunctionComposition.parse(text)
            _DISPLAY_TO_SERIAL[comp.display()] = text
    return _DISPLAY_TO_SERIAL.get(display_formula, display_formula)


def scenario_mc_carry(client):
    """Two authored warmup problems, then the carry state of 189+542."""
    from tutorsmith.domains import get_domain

    domain = get_domain("mc_addition")
    sid = make_session(client, "mc_addition", [777, 777])
    author_problem(client, sid, domain, domain.make_problem(777, 777))
    post(client, sid, {"event": "new_problem", "operands": [222, 222]})
    author_problem(client, sid, domain, domain.make_problem(222, 222))
    post(client, sid, {"event": "new_problem", "operands": [189, 542]})
    problem = domain.make_problem(189, 542)
    state = domain.start_state(problem)
    # grade and advance through the ones column to reach the carry state
    steps = {s.key(): s for s in domain.correct_steps(problem, state)}
    while True:
        current = view(client, sid)
        pending = [a for a in current["applications"] if a["feedback"] == "unset"]
        if not pending:
            break
        app = pending[0]
        key = (app["selection"], app["action_type"], app["input"])
        post(client, sid, {"event": "feedback", "app_id": app["app_id"],
                           "label": "positive" if key in steps else "negative"})
    current = view(client, sid)
    covered = {(a["selection"], a["action_type"], a["input"])
               for a in current["applications"]
               if a["feedback"] in ("positive", "demonstrated")}
    for key, step in sorted(steps.items()):
        if key not in covered:
            post(client, sid, {"event": "demo", "selection": step.action.selection,
                               "input": step.action.input, "args": list(step.args)})
    carry_state = post(client, sid, {"event": "move_on"})
    exchanges = []
    for _ in range(4):
        current = view(client, sid)
        pending = [a for a in current["applications"] if a["feedback"] == "unset"]
        if not pending:
            break
        app = pending[0]
        label = "positive" if app["input"] in ("3", "1") and app["selection"] in (
            "ans_tens", "carry_hund") else "negative"
        after = post(client, sid, {"event": "feedback", "app_id": app["app_id"],
                                   "label": label})
        exchanges.append({"app_id": app["app_id"], "label": label, "view": after})
    return {"name": "mc_carry", "carry_view": carry_state, "exchanges": exchanges}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app())
    for scenario in (scenario_multiply, scenario_convert, scenario_mc_carry):
        doc = scenario(client)
        path = OUT / f"{doc['name']}.json"
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
