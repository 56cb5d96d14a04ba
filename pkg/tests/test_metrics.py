import random

import pytest

from tutorsmith.agent import Agent, AgentConfig
from tutorsmith.domains import get_domain
from tutorsmith.harness.evaluator import HoldoutEvaluator
from tutorsmith.harness.ideal_tutor import train_on_problem
from tutorsmith.harness.metrics import completeness, precision_at, productive_monotonicity


class OracleAgent:
    """Delegates proposals to the ground truth; used for self-completeness."""

    def __init__(self, domain, problems):
        self.domain = domain
        self.by_start = {domain.start_state(p).signature(): p for p in problems}

    def act(self, state, start=None):
        problem = self.by_start[_start_sig(state)]
        out = []
        for step in self.domain.correct_steps(problem, state):
            out.append(_FakeApp(step.action))
        return out


def _start_sig(state):
    from tutorsmith.states import blank_unlocked

    return blank_unlocked(state).signature()


class _FakeApp:
    def __init__(self, action):
        self.action = action

    def key(self):
        return self.action.key()


def test_oracle_self_completeness_is_one():
    rng = random.Random(1)
    for domain_id in ("mc_addition", "fractions", "mc_addition_zero_carry"):
        domain = get_domain(domain_id)
        problems = [domain.generate(rng) for _ in range(10)]
        fraction, report = completeness(OracleAgent(domain, problems), domain, problems)
        assert fraction == 1.0
        assert all(v.complete for v in report)


def test_agent_proposing_nothing_scores_zero():
    domain = get_domain("fractions")
    problems = [domain.make_problem(4, 5, "x", 8, 3)]
    agent = Agent(AgentConfig())
    agent.begin_problem("p", domain.start_state(problems[0]))
    fraction, report = completeness(agent, domain, problems)
    assert fraction == 0.0
    assert all(v.missing for v in report)


def test_productive_monotonicity_counts():
    assert productive_monotonicity([(0.30, 0.60, True)]) == 1.0
    assert productive_monotonicity([(-0.20, -0.70, False)]) == 1.0
    series = [(0.0, 0.3, True), (0.4, 0.0, True), (0.0, -0.5, False)]
    assert productive_monotonicity(series) == pytest.approx(2 / 3)
    assert productive_monotonicity([(0.5, 0.5, True)]) is None


def test_precision_at_thresholds():
    preds = [(1.0, True), (1.0, True)]
    assert precision_at("==1.0", preds) == 1.0
    assert precision_at(">=0.9", [(0.95, True), (0.92, False)]) == 0.5
    assert precision_at("==1.0", [(0.95, True)]) is None
    with pytest.raises(ValueError):
        precision_at(">0.5", preds)


def test_evaluator_matches_naive_completeness_per_state():
    domain = get_domain("fractions")
    rng = random.Random(5)
    training = [domain.generate(rng) for _ in range(8)]
    holdout = [domain.generate(random.Random(99)) for _ in range(3)]
    agent = Agent(AgentConfig(learner="stand", htn=True, seed=1))
    evaluator = HoldoutEvaluator(domain, holdout)
    for p in training:
        train_on_problem(agent, domain, p)
    metrics = evaluator.evaluate(agent)
    fraction, report = completeness(agent, domain, holdout)
    assert metrics["completeness"] == pytest.approx(fraction)
    assert metrics["states_total"] == len(report)


def test_evaluator_matches_naive_for_flat_agent_too():
    domain = get_domain("mc_addition")
    rng = random.Random(6)
    training = [domain.generate(rng) for _ in range(6)]
    holdout = [domain.generate(random.Random(123)) for _ in range(2)]
    agent = Agent(AgentConfig(learner="decision_tree", htn=False, seed=4))
    evaluator = HoldoutEvaluator(domain, holdout)
    for p in training:
        train_on_problem(agent, domain, p)
    metrics = evaluator.evaluate(agent)
    fraction, _ = completeness(agent, domain, holdout)
    assert metrics["completeness"] == pytest.approx(fraction)
