"""The trainable agent: explains demos, absorbs feedback, proposes actions.

A skill pairs a how-composition (computes the value), a where-pattern
(locates candidate bindings), and a when-model (scores contextual
correctness as a signed certainty). Completed problems additionally feed
process-learning, which organizes skills into an HTN whose eligibility
gates the proposals; enabling the HTN can only remove proposals, never add.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

from . import htn as htnmod
from .compose import (
    CompositionError,
    DomainError,
    FunctionComposition,
    eval_composition,
    explain,
)
from .patterns import BindingExample, MatchPattern, induce_pattern, match_pattern
from .states import (
    CHECKED,
    PRESS_BUTTON,
    TOGGLE_CHECKBOX,
    UPDATE_FIELD,
    Action,
    WorkingState,
    apply_action,
    blank_unlocked,
)
from .whenlearn import FeatureTable, extract_features, state_features
from .whenlearn.models import LabeledExample, WhenModel, fit

DEFAULT_LIBRARY = ("Add", "Add3", "Multiply", "OnesDigit", "TensDigit", "Copy")


class AgentError(ValueError):
    pass


@dataclass(frozen=True)
class AgentConfig:
    learner: str = "stand"
    htn: bool = False
    library: tuple[str, ...] = DEFAULT_LIBRARY
    search_depth: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.learner not in ("stand", "decision_tree", "bagged_forest"):
            raise AgentError(f"unknown learner {self.learner!r}")


@dataclass(frozen=True)
class SkillApplication:
    app_id: str
    skill_id: str
    selection: str
    args: tuple[str, ...]
    action: Action
    certainty: float
    group: str | None = None
    label: str = ""

    def key(self) -> tuple:
        return self.action.key()


class Skill:
    def __init__(self, skill_id: str, how: FunctionComposition | None, action_type: str):
        self.skill_id = skill_id
        self.how = how
        self.action_type = action_type
        self.where: MatchPattern | None = None
        self.where_examples: list[BindingExample] = []
        # keyed when-data: last write wins on relabeling
        # key (state sig, selection, args) -> (features, label, prov, state)
        self.when_data: dict[tuple, tuple[dict, bool, tuple, WorkingState]] = {}
        self._model: WhenModel | None = None
        self._model_token: tuple | None = None
        self.data_version = 0
        self.structure_version = 0

    @property
    def label(self) -> str:
        if self.how is None:
            return self.action_type.replace("_", " ")
        return self.how.display()

    @property
    def how_key(self) -> str | None:
        return self.how.serialize() if self.how is not None else None

    @property
    def arity(self) -> int:
        return self.how.arity if self.how is not None else 0

    def comp_root(self) -> str | None:
        if self.how is None:
            return None
        root = self.how.root
        return getattr(root, "primitive", None)

    def add_where_example(self, example: BindingExample) -> bool:
        """Returns True when the pattern changed."""
        self.where_examples.append(example)
        old = self.where.signature() if self.where is not None else None
        interface = None
        pattern = induce_pattern(self.where_examples, interface, self.action_type)
        self.where = pattern
        changed = pattern.signature() != old
        if changed:
            self.structure_version += 1
        return changed

    def add_when_example(
        self, key: tuple, features: dict, label: bool, prov: tuple, state: WorkingState
    ) -> None:
        self.when_data[key] = (features, label, prov, state)
        self.data_version += 1
        self._model = None
        self._model_token = None

    def positive_count(self) -> int:
        return sum(1 for _, lab, _, _ in self.when_data.values() if lab)


class Agent:
    def __init__(self, config: AgentConfig):
        self.config = config
        self.skills: dict[str, Skill] = {}
        self._skill_by_key: dict[tuple, str] = {}
        self.htn = htnmod.HTN()
        # every task invocation ever seen: (feature key, features, chosen method)
        self.invocation_log: list[tuple[tuple, dict, str]] = []
        self._method_models: dict[str, WhenModel | None] = {}
        self.version = 0
        self.problem_start: WorkingState | None = None
        self.problem_id: str | None = None
        # per state signature: action key -> (trace step, demoed, certainty)
        self._positives: dict[tuple, dict[tuple, tuple]] = {}
        self._act_cache: dict[tuple, list[SkillApplication]] = {}
        self._parse_cache: dict[tuple, list[htnmod.Cursor]] = {}
        self._feature_cache: dict[tuple, dict] = {}
        self.event_log: list[dict] = []

    # -- bookkeeping --------------------------------------------------------
    def _bump(self):
        self.version += 1
        self._act_cache.clear()

    def begin_problem(self, problem_id: str, start: WorkingState) -> None:
        self.problem_id = problem_id
        self.problem_start = start
        self._positives = {}
        self._feature_cache.clear()
        self.event_log.append({"event": "begin_problem", "problem": problem_id})

    def skills_in_order(self) -> list[Skill]:
        return [self.skills[k] for k in sorted(self.skills, key=lambda s: int(s[1:]))]

    def structure_fingerprint(self) -> tuple:
        return tuple(
            (s.skill_id, s.how_key, s.structure_version) for s in self.skills_in_order()
        ) + (len(self.htn.retained),)

    # -- how/where/when updates ---------------------------------------------
    def _new_skill(self, how: FunctionComposition | None, action_type: str) -> Skill:
        skill_id = f"s{len(self.skills) + 1}"
        skill = Skill(skill_id, how, action_type)
        self.skills[skill_id] = skill
        self._skill_by_key[(skill.how_key, action_type)] = skill_id
        return skill

    def _features_for(
        self, state: WorkingState, skill: Skill, selection: str, args: tuple[str, ...],
        output: str | None,
    ) -> dict:
        key = (skill.skill_id, state.signature(), selection, args)
        cached = self._feature_cache.get(key)
        if cached is None:
            cached = extract_features(state, selection, args, skill.how, output)
            self._feature_cache[key] = cached
        return cached

    def train_demo(
        self,
        state: WorkingState,
        demo: Action,
        annotation: dict | None = None,
    ) -> SkillApplication:
        """Absorb one demonstrated action; returns the crediting application."""
        annotation = annotation or {}
        if demo.action_type == UPDATE_FIELD:
            comp, args = self._explain_demo(state, demo, annotation)
        else:
            comp, args = None, ()
        key = (comp.serialize() if comp is not None else None, demo.action_type)
        skill_id = self._skill_by_key.get(key)
        if skill_id is None:
            skill = self._new_skill(comp, demo.action_type)
        else:
            skill = self.skills[skill_id]
        skill.add_where_example(BindingExample(state, demo.selection, tuple(args)))
        features = self._features_for(state, skill, demo.selection, tuple(args), demo.input or None)
        data_key = (state.signature(), demo.selection, tuple(args))
        skill.add_when_example(
            data_key, features, True, (self.problem_id, hash(state.signature())), state
        )
        self._record_positive(state, skill, demo.selection, tuple(args), demo, demoed=True)
        self._bump()
        self.event_log.append(
            {
                "event": "demo",
                "problem": self.problem_id,
                "selection": demo.selection,
                "action_type": demo.action_type,
                "input": demo.input,
                "skill": skill.skill_id,
                "formula": skill.how_key,
                "args": list(args),
            }
        )
        app = self._application(state, skill, demo.selection, tuple(args), demo, 1.0, None)
        self._maybe_finish_problem(state, demo)
        return app

    def _explain_demo(self, state, demo, annotation):
        formula = annotation.get("formula")
        args = annotation.get("args")
        if formula is not None:
            comp = FunctionComposition.parse(formula)
            if args is None:
                raise AgentError("formula annotation requires args")
            values = [state.value_of(a) for a in args]
            if eval_composition(comp, values) != demo.input:
                raise AgentError(
                    f"annotation {formula} on {args} does not reproduce {demo.input!r}"
                )
            return comp, tuple(args)
        explanations = explain(
            state,
            demo,
            arg_constraint=tuple(args) if args is not None else None,
            library=self.config.library,
            depth=self.config.search_depth,
        )
        if not explanations:
            raise AgentError(
                f"no explanation for demo {demo.input!r} at {demo.selection} "
                f"(0 candidates)"
            )
        # prefer an explanation matching an existing skill, else the first
        for e in explanations:
            if (e.composition.serialize(), demo.action_type) in self._skill_by_key:
                return e.composition, e.argument_bindings
        chosen = explanations[0]
        return chosen.composition, chosen.argument_bindings

    def train_feedback(
        self, state: WorkingState, application: SkillApplication, label: bool
    ) -> None:
        """Grade one proposed application; relabeling overwrites."""
        skill = self.skills.get(application.skill_id)
        if skill is None:
            raise AgentError(f"feedback on unknown skill {application.skill_id!r}")
        expected = self._action_for(skill, state, application.selection, application.args)
        if expected is None or expected.key() != application.action.key():
            raise AgentError("feedback on an application the agent cannot reproduce")
        features = self._features_for(
            state, skill, application.selection, application.args,
            application.action.input or None,
        )
        data_key = (state.signature(), application.selection, application.args)
        skill.add_when_example(
            data_key, features, label, (self.problem_id, hash(state.signature())), state
        )
        if label:
            self._record_positive(
                state, skill, application.selection, application.args,
                application.action, demoed=False, certainty=application.certainty,
            )
        else:
            book = self._positives.get(state.signature(), {})
            prev = book.get(application.action.key())
            if prev is not None and prev[0].ref == (skill.skill_id, application.selection) \
                    and prev[0].args == application.args:
                del book[application.action.key()]
        self._bump()
        self.event_log.append(
            {
                "event": "feedback",
                "problem": self.problem_id,
                "app": application.app_id,
                "skill": application.skill_id,
                "selection": application.selection,
                "args": list(application.args),
                "label": "positive" if label else "negative",
            }
        )
        if label:
            self._maybe_finish_problem(state, application.action)

    def _record_positive(self, state, skill, selection, args, action,
                         demoed: bool = False, certainty: float = 1.0):
        """One trace step per unique action; demos outrank graded proposals.

        Value coincidences let several skills produce the same action; the
        trace must carry the action once, credited to the most trustworthy
        skill (demonstration annotation first, then highest certainty).
        """
        step = htnmod.TraceStep(
            skill.skill_id, selection, tuple(args), action.input, action.action_type
        )
        book = self._positives.setdefault(state.signature(), {})
        prev = book.get(action.key())
        if prev is not None:
            _, prev_demoed, prev_cert = prev
            if (prev_demoed, prev_cert) >= (demoed, certainty):
                return
        book[action.key()] = (step, demoed, certainty)

    def _maybe_finish_problem(self, state: WorkingState, action: Action) -> None:
        if action.action_type != PRESS_BUTTON:
            return
        trace = self._assemble_trace()
        if trace is not None:
            self.finish_problem(trace)

    def _assemble_trace(self) -> htnmod.Trace | None:
        if self.problem_start is None:
            return None
        state = self.problem_start
        groups: list[tuple[htnmod.TraceStep, ...]] = []
        seen = set()
        while True:
            sig = state.signature()
            if sig in seen:
                return None
            seen.add(sig)
            book = self._positives.get(sig)
            if not book:
                return None
            group = tuple(sorted((entry[0] for entry in book.values()), key=lambda s: s.ref))
            groups.append(group)
            done = False
            for step in group:
                state = apply_action(
                    state, Action(step.selection, step.action_type, step.input)
                )
                if state.done:
                    done = True
            if done:
                return htnmod.make_trace(groups)

    def finish_problem(self, trace: htnmod.Trace) -> None:
        """Fold a completed positive-path trace into the HTN."""
        if not self.config.htn:
            return
        resolver = _Resolver(self)
        new_htn, method_id = htnmod.induce_with_method(self.htn, trace, resolver)
        self.htn = new_htn
        start_feats = state_features(self.problem_start)
        feat_key = tuple(sorted(start_feats.items()))
        self.invocation_log.append((feat_key, start_feats, method_id))
        self._method_models.clear()
        self._parse_cache.clear()
        self._bump()
        self.event_log.append(
            {"event": "finish_problem", "problem": self.problem_id, "method": method_id}
        )

    def skill_model(self, skill: Skill) -> WhenModel:
        """The skill's when-model, refit lazily.

        In HTN mode, negative examples from contexts the induced structure
        now strictly excludes (the first open group did not contain the
        candidate) are left out of the fit: eligibility already rules those
        contexts out at proposal time, and asking the classifier to also
        carve them out only lets early-training noise distort its
        generalizations elsewhere.
        """
        token = (skill.data_version, len(self.htn.retained), self.config.learner)
        if skill._model is not None and skill._model_token == token:
            return skill._model
        curate = self.config.htn and not self.htn.is_empty()
        examples = []
        for (sig, sel, args), (feats, label, prov, state) in skill.when_data.items():
            if curate and not label:
                ref = (skill.skill_id, sel)
                if self._context_excluded(state, ref):
                    continue
            examples.append(LabeledExample(feats, label, prov))
        if not examples:  # everything curated away: fall back to the raw set
            examples = [
                LabeledExample(f, lab, prov)
                for f, lab, prov, _ in skill.when_data.values()
            ]
        skill._model = fit(self.config.learner, examples, self.config.seed)
        skill._model_token = token
        return skill._model

    def _context_excluded(self, state: WorkingState, ref: tuple) -> bool:
        start = blank_unlocked(state)
        cursors = self.parse_cursors(state, start)
        if not cursors:
            return False  # unparseable context: keep the evidence
        for cursor in cursors:
            if ref in htnmod.strict_eligible(self.htn, cursor):
                return False
        return True

    def _method_model(self, method_id: str) -> WhenModel | None:
        """Precondition model over all task invocations, retroactive.

        Every past invocation labels every current method (positive when it
        was the chosen one), so a late-born method still learns from the
        whole history. Invocation-state features carrying both labels are
        genuinely ambiguous for this feature set; a gate only exists when
        the remaining examples still discriminate, otherwise it stays out
        of the way and leaves the decision to parsing + when-models.
        """
        cached = self._method_models.get(method_id)
        if cached is False:
            return None
        if cached is not None:
            return cached
        by_key: dict[tuple, tuple[dict, set]] = {}
        for feat_key, feats, chosen in self.invocation_log:
            entry = by_key.setdefault(feat_key, (feats, set()))
            entry[1].add(chosen == method_id)
        examples = [
            LabeledExample(feats, labels == {True}, (method_id, i))
            for i, (feats, labels) in enumerate(by_key.values())
            if len(labels) == 1
        ]
        if not examples or len({e.label for e in examples}) == 1:
            self._method_models[method_id] = False
            return None
        model = fit(self.config.learner, examples, self.config.seed)
        self._method_models[method_id] = model
        return model

    def method_gate(self, method_id: str, start: WorkingState) -> bool:
        model = self._method_model(method_id)
        if model is None:
            return True
        return float(model.certainty(state_features(start))) > 0.0

    # -- acting --------------------------------------------------------------
    def _action_for(
        self, skill: Skill, state: WorkingState, selection: str, args: tuple[str, ...]
    ) -> Action | None:
        if skill.action_type == UPDATE_FIELD:
            try:
                value = eval_composition(skill.how, [state.value_of(a) for a in args])
            except (DomainError, CompositionError):
                return None
            return Action(selection, UPDATE_FIELD, value)
        if skill.action_type == TOGGLE_CHECKBOX:
            return Action(selection, TOGGLE_CHECKBOX, CHECKED)
        return Action(selection, PRESS_BUTTON, "")

    def candidates(self, state: WorkingState) -> list[SkillApplication]:
        """All scored where-bindings of all skills (no HTN gating)."""
        out: list[SkillApplication] = []
        for skill in self.skills_in_order():
            if skill.where is None:
                continue
            bindings = match_pattern(skill.where, state)
            rows = []
            metas = []
            for selection, args in bindings:
                action = self._action_for(skill, state, selection, args)
                if action is None:
                    continue
                rows.append(
                    self._features_for(state, skill, selection, args, action.input or None)
                )
                metas.append((selection, args, action))
            if not rows:
                continue
            model = self.skill_model(skill)
            certs = model.certainty_rows(rows)
            for (selection, args, action), cert in zip(metas, certs):
                out.append(
                    self._application(state, skill, selection, args, action, float(cert), None)
                )
        return out

    def _application(self, state, skill, selection, args, action, cert, group):
        app_id = hashlib.sha1(
            repr((skill.skill_id, selection, args, hash(state.signature()))).encode()
        ).hexdigest()[:12]
        return SkillApplication(
            app_id=app_id,
            skill_id=skill.skill_id,
            selection=selection,
            args=args,
            action=action,
            certainty=cert,
            group=group,
            label=skill.label,
        )

    def parse_cursors(
        self, state: WorkingState, start: WorkingState | None = None
    ) -> list[htnmod.Cursor]:
        start = start if start is not None else self.problem_start
        key = (start.signature(), state.signature(), self.structure_fingerprint())
        hit = self._parse_cache.get(key)
        if hit is None:
            hit = htnmod.parse_state(self.htn, state, start, _Resolver(self))
            self._parse_cache[key] = hit
        return hit

    def act(
        self, state: WorkingState, start: WorkingState | None = None
    ) -> list[SkillApplication]:
        """Proposals with certainty > 0, HTN-gated when enabled, deduplicated."""
        if state.done:
            return []
        start = start if start is not None else self.problem_start
        cache_key = (
            self.version,
            state.signature(),
            start.signature() if start is not None else None,
        )
        hit = self._act_cache.get(cache_key)
        if hit is not None:
            return hit
        candidates = self.candidates(state)
        if self.config.htn and not self.htn.is_empty() and start is not None:
            positive = {}
            for app in candidates:
                ref = (app.skill_id, app.selection)
                positive[ref] = max(positive.get(ref, -1.0), app.certainty)
            gate = lambda ref: positive.get(ref, -1.0) > 0.0  # noqa: E731
            eligible: dict[tuple, str] = {}
            for cursor in self.parse_cursors(state, start):
                if not self.method_gate(cursor.method_id, start):
                    continue
                for ref, tag in htnmod.eligible_items(self.htn, cursor, state, gate):
                    eligible.setdefault(ref, tag)
            gated = []
            for app in candidates:
                tag = eligible.get((app.skill_id, app.selection))
                if tag is not None:
                    gated.append(
                        SkillApplication(
                            app.app_id, app.skill_id, app.selection, app.args,
                            app.action, app.certainty, tag, app.label,
                        )
                    )
            candidates = gated
        # keep positive-certainty applications, one per unique action
        by_action: dict[tuple, SkillApplication] = {}
        for app in candidates:
            if app.certainty <= 0.0:
                continue
            prev = by_action.get(app.key())
            if prev is None or app.certainty > prev.certainty:
                by_action[app.key()] = app
        out = sorted(by_action.values(), key=lambda a: (a.skill_id, a.selection, a.args))
        self._act_cache[cache_key] = out
        return out


class _Resolver:
    """SkillResolver backed by the agent's skills."""

    def __init__(self, agent: Agent):
        self.agent = agent

    def action_type(self, skill_id: str) -> str:
        return self.agent.skills[skill_id].action_type

    def comp_root(self, skill_id: str) -> str | None:
        return self.agent.skills[skill_id].comp_root()

    def candidates_at(self, state, skill_id, target):
        skill = self.agent.skills[skill_id]
        if skill.where is None:
            return []
        out = []
        for selection, args in match_pattern(skill.where, state):
            if selection != target:
                continue
            action = self.agent._action_for(skill, state, selection, args)
            if action is not None:
                out.append((args, action.input))
        return out


# ---------------------------------------------------------------------------
# Behavior graphs


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    application: SkillApplication
    feedback: str = "unset"  # unset | demonstrated | positive | negative


@dataclass
class BehaviorGraph:
    nodes: dict[str, WorkingState] = field(default_factory=dict)
    edges: list[GraphEdge] = field(default_factory=list)
    start: str = ""
    groups: dict[tuple[str, str], list[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def node_id(sig):
            return sig

        return {
            "start": self.start,
            "nodes": [
                {
                    "id": nid,
                    "done": state.done,
                    "values": {
                        eid: el.value for eid, el in sorted(state.elements.items())
                    },
                }
                for nid, state in self.nodes.items()
            ],
            "edges": [
                {
                    "source": e.source,
                    "target": e.target,
                    "app_id": e.application.app_id,
                    "skill": e.application.skill_id,
                    "selection": e.application.selection,
                    "input": e.application.action.input,
                    "action_type": e.application.action.action_type,
                    "certainty": e.application.certainty,
                    "group": e.application.group,
                    "feedback": e.feedback,
                    "label": e.application.label,
                }
                for e in self.edges
            ],
            "groups": [
                {"node": node, "group": group, "edges": idxs}
                for (node, group), idxs in sorted(self.groups.items())
            ],
        }


def state_id(state: WorkingState) -> str:
    return hashlib.sha1(repr(state.signature()).encode()).hexdigest()[:12]


def generate_behavior_graph(
    agent: Agent,
    start: WorkingState,
    feedback_overlay: dict[tuple, str] | None = None,
    max_nodes: int = 500,
) -> BehaviorGraph:
    """Unroll the agent's program on one problem, breadth-first.

    feedback_overlay maps (state signature, action key) to a feedback state
    (demonstrated/positive/negative) recorded by the authoring session;
    proposals without overlay entries render unset (grey).
    """
    overlay = feedback_overlay or {}
    graph = BehaviorGraph()
    graph.start = state_id(start)
    graph.nodes[graph.start] = start
    queue = [start]
    while queue and len(graph.nodes) < max_nodes:
        state = queue.pop(0)
        sid = state_id(state)
        if state.done:
            continue
        proposals = agent.act(state)
        demo_keys = [
            (key, fb) for (sig, key), fb in overlay.items() if sig == state.signature()
        ]
        proposed_keys = {app.key() for app in proposals}
        extras = [
            key for key, fb in demo_keys if fb == "demonstrated" and key not in proposed_keys
        ]
        for app in proposals:
            nxt = apply_action(state, app.action)
            nid = state_id(nxt)
            if nid not in graph.nodes:
                if len(graph.nodes) >= max_nodes:
                    break
                graph.nodes[nid] = nxt
                queue.append(nxt)
            feedback = overlay.get((state.signature(), app.key()), "unset")
            graph.edges.append(GraphEdge(sid, nid, app, feedback))
            if app.group is not None:
                graph.groups.setdefault((sid, app.group), []).append(len(graph.edges) - 1)
        for key in sorted(extras):
            selection, action_type, input_value = key
            action = Action(selection, action_type, input_value)
            nxt = apply_action(state, action)
            nid = state_id(nxt)
            if nid not in graph.nodes and len(graph.nodes) < max_nodes:
                graph.nodes[nid] = nxt
                queue.append(nxt)
            if nid in graph.nodes:
                app = SkillApplication(
                    app_id="demo-" + hashlib.sha1(repr((key, sid)).encode()).hexdigest()[:8],
                    skill_id="",
                    selection=selection,
                    args=(),
                    action=action,
                    certainty=1.0,
                    group=None,
                    label="demonstration",
                )
                graph.edges.append(GraphEdge(sid, nid, app, "demonstrated"))
    return graph
