"""When-learning models over labeled candidate applications.

``stand`` maintains an approximate version space of the tie-optimal
decision trees fitting the data: an option tree whose OR nodes hold every
split with near-best gini reduction, each sharing its parent's weight
equally. Enumerating that tree exactly blows up combinatorially (the
published data structure relies on aggressive compression), so the model
here is a fixed-size Monte Carlo rendering of the same object: each member
tree is grown by sampling one option uniformly at every OR node, which
draws member trees from exactly the option-tree weight distribution, and
the signed instance certainty (w+ - w-)/(w+ + w-) is estimated from the
member votes. The sampler is seeded from a hash of the canonicalized
training data, so stand stays deterministic, order-independent, and
independent of the caller's seed.

``decision_tree`` is the same machinery expanding just one random
tie-optimal split per node (caller-seeded); ``bagged_forest`` bags 100 such
trees on bootstrap resamples.

All learners grow to purity: the training data is noiseless, and a repeated
feature vector with conflicting labels is a reportable inconsistency, not
something to average over.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import backend
from .encode import Encoder, FeatureTable, SchemaMismatch

log = logging.getLogger(__name__)

# a split is a member of the "good" set when its gini reduction comes within
# this relative share of the node's best
TIE_TOL = 0.1
MAX_OPTIONS = 32
# members sampled from the version space for stand's certainty estimate
N_STAND_MEMBERS = 25
# per-node feature-subset fractions, cycled across stand members: every
# member still classifies all training data perfectly (a node falls back to
# all features when its subset cannot split), but the mix of scopes keeps
# any single spuriously-pure feature from dominating the sampled space
# while fully-scoped members preserve the sharp gini-anchored splits
STAND_FEATURE_FRACTIONS = (1.0, 0.5, 0.25)
# test hook: truncate every tie set to its lexicographically first split
FORCE_FIRST_OPTION = False

LEARNERS = ("stand", "decision_tree", "bagged_forest")

N_FOREST_TREES = 100


@dataclass(frozen=True)
class LabeledExample:
    features: dict
    label: bool  # True = correct
    provenance: tuple = ()


class TrainingInconsistency(ValueError):
    """The same feature vector appeared with both labels."""

    def __init__(self, provenance_a, provenance_b):
        self.provenance_a = provenance_a
        self.provenance_b = provenance_b
        super().__init__(
            f"contradictory labels for identical feature vectors: "
            f"{provenance_a} vs {provenance_b}"
        )

    def __reduce__(self):
        return (TrainingInconsistency, (self.provenance_a, self.provenance_b))


class _Arrays:
    """Flattened option tree (possibly a DAG through shared subtrees)."""

    __slots__ = ("kind", "label", "opt_ptr", "opt_feat", "opt_thr", "opt_left", "opt_right", "topo")

    def __init__(self, kind, label, opt_ptr, opt_feat, opt_thr, opt_left, opt_right):
        self.kind = np.asarray(kind, dtype=np.int8)
        self.label = np.asarray(label, dtype=np.int8)
        self.opt_ptr = np.asarray(opt_ptr, dtype=np.int64)
        self.opt_feat = np.asarray(opt_feat, dtype=np.int64)
        self.opt_thr = np.asarray(opt_thr, dtype=np.float64)
        self.opt_left = np.asarray(opt_left, dtype=np.int64)
        self.opt_right = np.asarray(opt_right, dtype=np.int64)
        self.topo = self._topo_order()

    def _topo_order(self) -> np.ndarray:
        n = len(self.kind)
        state = np.zeros(n, dtype=np.int8)  # 0 unseen, 1 open, 2 closed
        order: list[int] = []
        stack: list[tuple[int, bool]] = [(0, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if state[node]:
                continue
            state[node] = 1
            stack.append((node, True))
            if self.kind[node] == 1:
                for k in range(self.opt_ptr[node], self.opt_ptr[node + 1]):
                    for child in (int(self.opt_right[k]), int(self.opt_left[k])):
                        if not state[child]:
                            stack.append((child, False))
        order.reverse()
        return np.asarray(order, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    def route(self, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = Q.shape[0]
        w_pos = np.empty(m, dtype=np.float64)
        w_neg = np.empty(m, dtype=np.float64)
        chunk = max(256, 4_000_000 // max(1, self.n_nodes))
        for lo in range(0, m, chunk):
            hi = min(m, lo + chunk)
            p, n = backend.route_weights(
                self.kind, self.label, self.opt_ptr, self.opt_feat,
                self.opt_thr, self.opt_left, self.opt_right, self.topo,
                np.ascontiguousarray(Q[lo:hi]),
            )
            w_pos[lo:hi] = p
            w_neg[lo:hi] = n
        if m == 0:
            return np.zeros(0), np.zeros(0)
        return w_pos, w_neg


class _ScanCache:
    """Raw candidate splits per example subset, shared across member trees."""

    def __init__(self, X: np.ndarray, y: np.ndarray, w: np.ndarray):
        self.X = X
        self.y = y
        self.w = w
        self._cache: dict[bytes, tuple] = {}

    def scan(self, idx: np.ndarray) -> tuple:
        key = idx.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            Xn = np.ascontiguousarray(self.X[idx])
            feat, thr, red, _ = backend.scan_splits(Xn, self.y[idx], self.w[idx])
            hit = (feat, thr, red)
            self._cache[key] = hit
        return hit

    def options(
        self, idx: np.ndarray, feature_mask: np.ndarray | None = None
    ) -> list[tuple[int, float]]:
        """Tie-optimal (feature, threshold) splits, optionally within a
        feature subset; an unsplittable subset falls back to all features."""
        feat, thr, red = self.scan(idx)
        if len(feat) == 0:
            return []
        if feature_mask is not None:
            keep_mask = feature_mask[feat]
            if keep_mask.any():
                feat, thr, red = feat[keep_mask], thr[keep_mask], red[keep_mask]
        best = float(np.max(red))
        cutoff = best - TIE_TOL * max(best, 1e-12)
        keep = np.nonzero(red >= cutoff)[0]
        if len(keep) > MAX_OPTIONS:
            log.info("option cap hit: %d tie-optimal splits at one node", len(keep))
            keep = keep[:MAX_OPTIONS]
        options = [(int(feat[k]), float(thr[k])) for k in keep]
        if FORCE_FIRST_OPTION:
            options = options[:1]
        return options


class _TreeBuilder:
    """Grows one pure decision tree, breaking split ties via the rng."""

    def __init__(self, scans: _ScanCache, rng, feature_fraction: float | None = None):
        self.scans = scans
        self.rng = rng
        self.feature_fraction = feature_fraction
        self.n_features = scans.X.shape[1]
        self.kind: list[int] = []
        self.label: list[int] = []
        self.node_opts: list[list[tuple]] = []

    def build(self, idx: np.ndarray) -> _Arrays:
        root = self._grow(idx)
        assert root == 0
        opt_ptr = [0]
        opt_feat, opt_thr, opt_left, opt_right = [], [], [], []
        for opts in self.node_opts:
            for f, t, l, r in opts:
                opt_feat.append(f)
                opt_thr.append(t)
                opt_left.append(l)
                opt_right.append(r)
            opt_ptr.append(len(opt_feat))
        return _Arrays(self.kind, self.label, opt_ptr, opt_feat, opt_thr, opt_left, opt_right)

    def _new_node(self) -> int:
        self.kind.append(0)
        self.label.append(0)
        self.node_opts.append([])
        return len(self.kind) - 1

    def _grow(self, idx: np.ndarray) -> int:
        node = self._new_node()
        ys = self.scans.y[idx]
        if ys.min() == ys.max():
            self.kind[node] = 0
            self.label[node] = int(ys[0])
            return node
        mask = None
        if (
            self.feature_fraction is not None
            and self.feature_fraction < 1.0
            and not FORCE_FIRST_OPTION
        ):
            size = max(1, int(round(self.feature_fraction * self.n_features)))
            chosen = self.rng.sample(self.n_features, size)
            mask = np.zeros(self.n_features, dtype=bool)
            mask[chosen] = True
        options = self.scans.options(idx, mask)
        if not options:
            # identical vectors, mixed labels: callers pre-check, belt and braces
            raise TrainingInconsistency(("unknown",), ("unknown",))
        f, t = options[self.rng.randrange(len(options))]
        mask = self.scans.X[idx, f] <= t
        left = self._grow(idx[mask])
        right = self._grow(idx[~mask])
        self.kind[node] = 1
        self.node_opts[node].append((f, t, left, right))
        return node


def _canonicalize(X: np.ndarray, y: np.ndarray, provs: list) -> tuple:
    order = sorted(range(len(y)), key=lambda i: (X[i].tobytes(), y[i]))
    Xc = np.ascontiguousarray(X[order])
    yc = y[order]
    pc = [provs[i] for i in order]
    for i in range(len(yc) - 1):
        if yc[i] != yc[i + 1] and Xc[i].tobytes() == Xc[i + 1].tobytes():
            raise TrainingInconsistency(pc[i], pc[i + 1])
    return Xc, yc, pc


class WhenModel:
    """Common surface: signed certainty of correctness for feature maps."""

    learner: str

    def __init__(self, encoder: Encoder):
        self.encoder = encoder

    # --- public API -------------------------------------------------------
    def certainty(self, features: dict) -> float:
        return float(self.certainty_rows([features])[0])

    def certainty_rows(self, rows: Sequence[dict]) -> np.ndarray:
        return self.certainty_encoded(self.encoder.transform_rows(list(rows)))

    def certainty_table(self, table: FeatureTable) -> np.ndarray:
        return self.certainty_encoded(self.encoder.transform(table))

    def certainty_encoded(self, Q: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ConstantModel(WhenModel):
    """Single-label training data: constant prediction at full certainty."""

    def __init__(self, encoder: Encoder | None, value: float, learner: str):
        super().__init__(encoder)
        self.value = value
        self.learner = learner

    def certainty_rows(self, rows):
        if self.encoder is not None:
            self.encoder.transform_rows(list(rows))  # schema check
        return np.full(len(rows), self.value, dtype=np.float64)

    def certainty_table(self, table):
        return np.full(table.rows, self.value, dtype=np.float64)

    def certainty_encoded(self, Q):
        return np.full(Q.shape[0], self.value, dtype=np.float64)


class StandModel(WhenModel):
    """Member votes over the sampled version space of good trees."""

    learner = "stand"

    def __init__(self, encoder: Encoder, members: list[_Arrays]):
        super().__init__(encoder)
        self.members = members

    def certainty_encoded(self, Q: np.ndarray) -> np.ndarray:
        w_pos = np.zeros(Q.shape[0], dtype=np.float64)
        w_neg = np.zeros(Q.shape[0], dtype=np.float64)
        for member in self.members:
            p, n = member.route(Q)
            w_pos += p
            w_neg += n
        return (w_pos - w_neg) / (w_pos + w_neg)


class DecisionTreeModel(WhenModel):
    learner = "decision_tree"

    def __init__(self, encoder: Encoder, arrays: _Arrays):
        super().__init__(encoder)
        self.arrays = arrays

    def certainty_encoded(self, Q: np.ndarray) -> np.ndarray:
        w_pos, w_neg = self.arrays.route(Q)
        return (w_pos - w_neg) / (w_pos + w_neg)


class BaggedForestModel(WhenModel):
    learner = "bagged_forest"

    def __init__(self, encoder: Encoder, trees: list[_Arrays]):
        super().__init__(encoder)
        self.trees = trees

    def certainty_encoded(self, Q: np.ndarray) -> np.ndarray:
        votes = np.zeros(Q.shape[0], dtype=np.float64)
        for tree in self.trees:
            w_pos, _ = tree.route(Q)
            votes += w_pos
        p_correct = votes / float(len(self.trees))
        return 2.0 * p_correct - 1.0


def fit(learner: str, examples: Sequence[LabeledExample], seed: int = 0) -> WhenModel:
    """Fit a when-model; stand is deterministic and order-independent."""
    if learner not in LEARNERS:
        raise ValueError(f"unknown learner {learner!r}")
    examples = list(examples)
    if not examples:
        raise ValueError("cannot fit on zero examples")
    table = FeatureTable.from_rows([e.features for e in examples])
    encoder = Encoder(table)
    return fit_encoded(
        learner,
        encoder,
        encoder.transform(table),
        np.array([1 if e.label else 0 for e in examples], dtype=np.int8),
        [e.provenance for e in examples],
        seed,
    )


def fit_encoded(
    learner: str,
    encoder: Encoder,
    X: np.ndarray,
    y: np.ndarray,
    provenances: list,
    seed: int,
) -> WhenModel:
    labels = set(int(v) for v in y)
    if len(labels) == 1:
        value = 1.0 if labels.pop() == 1 else -1.0
        return ConstantModel(encoder, value, learner)
    Xc, yc, pc = _canonicalize(X, y, list(provenances))
    ones = np.ones(len(yc), dtype=np.float64)
    all_idx = np.arange(len(yc), dtype=np.int64)
    if learner == "stand":
        # seeded from the canonical data itself: deterministic, order- and
        # caller-seed-independent
        digest = hashlib.sha1(Xc.tobytes() + yc.tobytes()).digest()
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "big")))
        scans = _ScanCache(Xc, yc, ones)
        members = [
            _TreeBuilder(
                scans,
                _RngAdapter(rng),
                feature_fraction=STAND_FEATURE_FRACTIONS[
                    i % len(STAND_FEATURE_FRACTIONS)
                ],
            ).build(all_idx)
            for i in range(N_STAND_MEMBERS)
        ]
        return StandModel(encoder, members)
    rng = np.random.Generator(np.random.PCG64(seed))
    if learner == "decision_tree":
        scans = _ScanCache(Xc, yc, ones)
        arrays = _TreeBuilder(scans, _RngAdapter(rng)).build(all_idx)
        return DecisionTreeModel(encoder, arrays)
    trees = []
    n = len(yc)
    for _ in range(N_FOREST_TREES):
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        sub = np.nonzero(counts)[0]
        if int(yc[sub].min()) == int(yc[sub].max()):
            # degenerate bootstrap: single-label resample votes constantly
            trees.append(_leaf_arrays(int(yc[sub][0])))
        else:
            scans = _ScanCache(
                np.ascontiguousarray(Xc[sub]), yc[sub], counts[sub]
            )
            trees.append(
                _TreeBuilder(scans, _RngAdapter(rng)).build(
                    np.arange(len(sub), dtype=np.int64)
                )
            )
    return BaggedForestModel(encoder, trees)


def _leaf_arrays(label: int) -> _Arrays:
    return _Arrays([0], [label], [0, 0], [], [], [], [])


class _RngAdapter:
    def __init__(self, rng):
        self._rng = rng

    def randrange(self, k: int) -> int:
        return int(self._rng.integers(k))

    def sample(self, n: int, k: int) -> np.ndarray:
        return self._rng.choice(n, size=k, replace=False)


def predict_certainty(model: WhenModel, features: dict) -> float:
    """Signed certainty in [-1, +1]; sign is the predicted label."""
    return model.certainty(features)
