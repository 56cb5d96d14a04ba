"""Batched holdout evaluation for experiment checkpoints.

Evaluating after every training problem over ~100 holdout problems demands
caching: reachable states and ground-truth sets are enumerated once,
per-skill candidate panels (bindings + feature tables) are rebuilt only
when a skill's structure changes, and each checkpoint reduces to one
encode+route pass per skill. The verdicts must match metrics.completeness
state for state (asserted in tests).
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import htn as htnmod
from ..agent import Agent, _Resolver
from ..domains.base import Domain, Problem
from ..patterns import match_pattern
from ..whenlearn import FeatureTable, extract_features, state_features


@dataclass
class _Entry:
    problem_idx: int
    state: object
    gt_keys: frozenset


class _SkillPanel:
    def __init__(self):
        self.fingerprint = None
        self.metas: list[tuple[int, str, tuple, tuple]] = []  # (entry idx, sel, args, action key)
        self.table: FeatureTable | None = None

    def ensure(self, agent: Agent, skill, entries) -> None:
        fp = (skill.how_key, skill.where.signature() if skill.where else None)
        if fp == self.fingerprint:
            return
        self.fingerprint = fp
        self.metas = []
        rows = []
        for ei, entry in enumerate(entries):
            for selection, args in match_pattern(skill.where, entry.state):
                action = agent._action_for(skill, entry.state, selection, args)
                if action is None:
                    continue
                rows.append(
                    extract_features(
                        entry.state, selection, args, skill.how, action.input or None
                    )
                )
                self.metas.append((ei, selection, args, action.key()))
        self.table = FeatureTable.from_rows(rows) if rows else None


class HoldoutEvaluator:
    def __init__(self, domain: Domain, problems: list[Problem]):
        self.domain = domain
        self.problems = problems
        self.starts = [domain.start_state(p) for p in problems]
        self.start_features = [state_features(s) for s in self.starts]
        self.entries: list[_Entry] = []
        for pi, problem in enumerate(problems):
            for state in domain.reachable_states(problem):
                if state.done:
                    continue
                self.entries.append(
                    _Entry(pi, state, frozenset(domain.correct_actions(problem, state)))
                )
        self.panels: dict[str, _SkillPanel] = {}
        self._parse_cache: dict = {}
        self._parse_fp = None
        # untrained baseline: every action sits at the unproducible -1.0
        self.prev_certs: dict[tuple, float] = {}

    def reset_run(self) -> None:
        """Reset per-repetition state; panels persist (content-keyed)."""
        self.prev_certs = {}
        self._parse_cache = {}
        self._parse_fp = None

    # -- HTN plumbing --------------------------------------------------------
    def _cursors(self, agent: Agent, ei: int) -> list[htnmod.Cursor]:
        fp = (agent.htn.fingerprint(),) + tuple(
            (s.skill_id, s.how_key, s.structure_version) for s in agent.skills_in_order()
        )
        if fp != self._parse_fp:
            self._parse_fp = fp
            self._parse_cache = {}
        hit = self._parse_cache.get(ei)
        if hit is None:
            entry = self.entries[ei]
            hit = htnmod.parse_state(
                agent.htn, entry.state, self.starts[entry.problem_idx], _Resolver(agent)
            )
            self._parse_cache[ei] = hit
        return hit

    def _method_gates(self, agent: Agent) -> dict[tuple[str, int], bool]:
        gates: dict[tuple[str, int], bool] = {}
        for method in agent.htn.methods():
            model = agent._method_model(method.method_id)
            if model is None:
                for pi in range(len(self.problems)):
                    gates[(method.method_id, pi)] = True
                continue
            certs = model.certainty_rows(self.start_features)
            for pi, cert in enumerate(certs):
                gates[(method.method_id, pi)] = float(cert) > 0.0
        return gates

    # -- checkpoint evaluation ------------------------------------------------
    def evaluate(self, agent: Agent) -> dict:
        n_entries = len(self.entries)
        # certainty per (entry, action key), max over producing bindings
        cert_map: dict[tuple, float] = {}
        # certainty per (entry, (skill, selection)) for eligibility gates
        ref_cert: dict[tuple, float] = {}
        for skill in agent.skills_in_order():
            if skill.where is None:
                continue
            panel = self.panels.setdefault(skill.skill_id, _SkillPanel())
            panel.ensure(agent, skill, self.entries)
            if panel.table is None:
                continue
            model = agent.skill_model(skill)
            certs = model.certainty_table(panel.table)
            for (ei, selection, args, action_key), cert in zip(panel.metas, certs):
                cert = float(cert)
                key = (ei, action_key)
                if cert > cert_map.get(key, -2.0):
                    cert_map[key] = cert
                rkey = (ei, (skill.skill_id, selection))
                if cert > ref_cert.get(rkey, -2.0):
                    ref_cert[rkey] = cert

        htn_on = agent.config.htn and not agent.htn.is_empty()
        gates = self._method_gates(agent) if htn_on else {}

        proposals: list[set] = [set() for _ in range(n_entries)]
        if htn_on:
            # eligibility per entry, then positive-certainty filter
            by_entry: dict[int, list[tuple]] = {}
            for (ei, action_key), cert in cert_map.items():
                by_entry.setdefault(ei, []).append((action_key, cert))
            ref_by_entry: dict[int, dict] = {}
            for (ei, ref), cert in ref_cert.items():
                ref_by_entry.setdefault(ei, {})[ref] = cert
            # (skill, selection) -> action keys produced there
            key_refs: dict[int, dict] = {}
            for skill_id, panel in self.panels.items():
                for ei, selection, args, action_key in panel.metas:
                    key_refs.setdefault(ei, {}).setdefault(action_key, set()).add(
                        (skill_id, selection)
                    )
            for ei in range(n_entries):
                entry = self.entries[ei]
                refs = ref_by_entry.get(ei, {})
                gate = lambda ref: refs.get(ref, -1.0) > 0.0  # noqa: E731
                eligible: set = set()
                for cursor in self._cursors(agent, ei):
                    if not gates.get((cursor.method_id, entry.problem_idx), True):
                        continue
                    for ref, _tag in htnmod.eligible_items(
                        agent.htn, cursor, entry.state, gate
                    ):
                        eligible.add(ref)
                for action_key, cert in by_entry.get(ei, ()):
                    if cert <= 0.0:
                        continue
                    if key_refs.get(ei, {}).get(action_key, set()) & eligible:
                        proposals[ei].add(action_key)
        else:
            for (ei, action_key), cert in cert_map.items():
                if cert > 0.0:
                    proposals[ei].add(action_key)

        complete = sum(
            1 for ei in range(n_entries) if proposals[ei] == self.entries[ei].gt_keys
        )

        # PM / precision panel: ground truth union proposals at evaluation time
        certs_now: dict[tuple, float] = {}
        pm_productive = 0
        pm_nonzero = 0
        prec = {">=0.9": [0, 0], "==1.0": [0, 0]}
        for ei in range(n_entries):
            keys = set(self.entries[ei].gt_keys) | proposals[ei]
            for key in keys:
                cert = cert_map.get((ei, key), -1.0)
                certs_now[(ei, key)] = cert
                label = key in self.entries[ei].gt_keys
                if cert >= 0.9:
                    prec[">=0.9"][0] += 1
                    prec[">=0.9"][1] += label
                if cert == 1.0:
                    prec["==1.0"][0] += 1
                    prec["==1.0"][1] += label
                before = self.prev_certs.get((ei, key), -1.0)
                delta = cert - before
                if delta != 0.0:
                    pm_nonzero += 1
                    if (label and delta > 0) or (not label and delta < 0):
                        pm_productive += 1
        self.prev_certs = certs_now

        return {
            "completeness": complete / n_entries if n_entries else 0.0,
            "states_total": n_entries,
            "states_complete": complete,
            "pm_productive": pm_productive,
            "pm_nonzero": pm_nonzero,
            "prec90_n": prec[">=0.9"][0],
            "prec90_correct": prec[">=0.9"][1],
            "prec100_n": prec["==1.0"][0],
            "prec100_correct": prec["==1.0"][1],
        }
