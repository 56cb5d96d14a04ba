import pytest

from tutorsmith.agent import Agent, AgentConfig, AgentError, generate_behavior_graph
from tutorsmith.domains import get_domain
from tutorsmith.harness.ideal_tutor import train_on_problem
from tutorsmith.states import Action, apply_action


def fresh(learner="stand", htn=False, seed=0):
    return Agent(AgentConfig(learner=learner, htn=htn, seed=seed))


def begin(agent, domain, problem):
    start = domain.start_state(problem)
    agent.begin_problem(problem.problem_id, start)
    return start


def test_first_demo_creates_multiply_skill():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    app = agent.train_demo(
        start, Action("ans_den", "update_field", "15"), {"args": ["den1", "den2"]}
    )
    skill = agent.skills[app.skill_id]
    assert skill.how_key == "Multiply(A0,A1)"
    assert skill.label == "A * B"
    assert app.args == ("den1", "den2")


def test_second_demo_reuses_skill_and_generalizes():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    a1 = agent.train_demo(
        start, Action("ans_den", "update_field", "15"), {"args": ["den1", "den2"]}
    )
    p2 = fr.make_problem(1, 9, "x", 1, 3)
    start2 = begin(agent, fr, p2)
    a2 = agent.train_demo(
        start2, Action("ans_den", "update_field", "27"), {"args": ["den1", "den2"]}
    )
    assert a1.skill_id == a2.skill_id
    assert len(agent.skills) == 1


def test_done_demo_creates_constant_skill():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    state = apply_action(start, Action("ans_num", "update_field", "32"))
    state = apply_action(state, Action("ans_den", "update_field", "15"))
    app = agent.train_demo(state, Action("done", "press_button", ""))
    skill = agent.skills[app.skill_id]
    assert skill.how is None
    assert skill.action_type == "press_button"


def test_inexplicable_demo_is_an_error():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    with pytest.raises(AgentError, match="0 candidates"):
        agent.train_demo(start, Action("ans_den", "update_field", "999"))


def test_untrained_agent_proposes_nothing():
    mc = get_domain("mc_addition")
    agent = fresh()
    p = mc.make_problem(597, 346)
    start = begin(agent, mc, p)
    assert agent.act(start) == []


def test_feedback_roundtrip_restores_full_certainty():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    agent.train_demo(start, Action("ans_den", "update_field", "15"), {"args": ["den1", "den2"]})
    p2 = fr.make_problem(2, 7, "x", 3, 5)
    start2 = begin(agent, fr, p2)
    proposals = agent.act(start2)
    assert proposals, "pattern should carry to a fresh problem"
    target = proposals[0]
    agent.train_feedback(start2, target, True)
    after = [a for a in agent.act(start2) if a.key() == target.key()]
    assert after and after[0].certainty == 1.0


def test_relabeling_flips_stored_label():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    agent.train_demo(start, Action("ans_den", "update_field", "15"), {"args": ["den1", "den2"]})
    p2 = fr.make_problem(2, 7, "x", 3, 5)
    start2 = begin(agent, fr, p2)
    app = agent.act(start2)[0]
    agent.train_feedback(start2, app, False)
    agent.train_feedback(start2, app, True)
    skill = agent.skills[app.skill_id]
    key = (start2.signature(), app.selection, app.args)
    assert skill.when_data[key][1] is True  # last write wins


def test_feedback_on_unknown_application_rejected():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    app = agent.train_demo(
        start, Action("ans_den", "update_field", "15"), {"args": ["den1", "den2"]}
    )
    fake = app.__class__(
        app_id="zzz", skill_id="s99", selection="ans_den", args=("den1", "den2"),
        action=app.action, certainty=1.0,
    )
    with pytest.raises(AgentError):
        agent.train_feedback(start, fake, True)


def test_act_deduplicates_same_action():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(3, 7, "+", 2, 7)
    start = begin(agent, fr, p)
    agent.train_demo(start, Action("ans_den", "update_field", "7"), {"args": ["den1"]})
    agent.train_demo(start, Action("ans_den", "update_field", "7"), {"args": ["den2"]})
    p2 = fr.make_problem(1, 4, "+", 2, 4)
    start2 = begin(agent, fr, p2)
    keys = [a.key() for a in agent.act(start2)]
    assert len(keys) == len(set(keys))


def train_ideal(agent, domain, problems):
    for p in problems:
        train_on_problem(agent, domain, p)


def test_determinism_across_identical_logs():
    import random

    fr = get_domain("fractions")
    rng = random.Random(12)
    problems = [fr.generate(rng) for _ in range(6)]
    outs = []
    for _ in range(2):
        agent = fresh(htn=True, seed=5)
        train_ideal(agent, fr, problems)
        probe = fr.make_problem(5, 6, "+", 2, 3)
        start = fr.start_state(probe)
        agent.begin_problem("probe", start)
        outs.append(
            [
                (a.skill_id, a.selection, a.args, a.action.key(), a.certainty)
                for a in agent.act(start)
            ]
        )
    assert outs[0] == outs[1]


def test_htn_gating_only_filters():
    import random

    fr = get_domain("fractions")
    rng = random.Random(9)
    problems = [fr.generate(rng) for _ in range(6)]
    flat, gated = fresh(htn=False, seed=2), fresh(htn=True, seed=2)
    train_ideal(flat, fr, problems)
    train_ideal(gated, fr, problems)
    rng2 = random.Random(77)
    for _ in range(6):
        p = fr.generate(rng2)
        start = fr.start_state(p)
        for state in fr.reachable_states(p):
            if state.done:
                continue
            flat_keys = {a.key() for a in flat.act(state, start=start)}
            gated_keys = {a.key() for a in gated.act(state, start=start)}
            # same interaction history would be needed for set inclusion per
            # agent; with htn both agents trained identically so compare the
            # gated agent against its own ungated candidate set instead
            ungated = {
                a.key()
                for a in gated.candidates(state)
                if a.certainty > 0.0
            }
            assert gated_keys <= ungated


def test_behavior_graph_multiply_problem():
    import random

    fr = get_domain("fractions")
    rng = random.Random(21)
    agent = fresh(htn=True, seed=3)
    train_ideal(agent, fr, [fr.generate(rng) for _ in range(8)])
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = fr.start_state(p)
    agent.begin_problem("graph-probe", start)
    graph = generate_behavior_graph(agent, start)
    # linear chain with one 2-member unordered group then done:
    # start, two mid states, combined state, done state
    assert len(graph.nodes) == 5
    start_edges = [e for e in graph.edges if e.source == graph.start]
    assert len(start_edges) == 2
    assert len({e.application.group for e in start_edges}) == 1
    assert any(s.done for s in graph.nodes.values())


def test_behavior_graph_untrained_agent_is_single_node():
    mc = get_domain("mc_addition")
    agent = fresh()
    p = mc.make_problem(597, 346)
    start = begin(agent, mc, p)
    graph = generate_behavior_graph(agent, start)
    assert len(graph.nodes) == 1
    assert graph.edges == []


def test_behavior_graph_feedback_overlay_colors():
    fr = get_domain("fractions")
    agent = fresh()
    p = fr.make_problem(4, 5, "x", 8, 3)
    start = begin(agent, fr, p)
    agent.train_demo(start, Action("ans_den", "update_field", "15"), {"args": ["den1", "den2"]})
    overlay = {
        (start.signature(), ("ans_den", "update_field", "15")): "demonstrated",
    }
    graph = generate_behavior_graph(agent, start, overlay)
    feedbacks = {e.feedback for e in graph.edges}
    assert "demonstrated" in feedbacks
