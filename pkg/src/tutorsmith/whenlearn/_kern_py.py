"""Pure numpy kernels: gini split scanning and option-tree weight routing.

This is the fallback backend; the compiled extension (_kern.pyx) implements
the same two entry points. Both are written against the identical sequence
of IEEE-754 operations (class counts are integer-valued floats, so prefix
sums are exact) which makes their outputs bit-identical — asserted by the
backend-equivalence tests.
"""

from __future__ import annotations

import numpy as np


def scan_splits(X: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Candidate splits for one node's data.

    X: (n, d) float64, y: (n,) int8 in {0,1}, w: (n,) float64 integer-valued
    weights. Returns (feat, thr, red, parent_gini) where each candidate i
    tests X[:, feat[i]] <= thr[i]; thresholds are midpoints between adjacent
    distinct observed values, emitted in (feature, threshold-ascending)
    order; red is the gini impurity reduction.
    """
    n, d = X.shape
    s_tot = float(np.sum(w))
    p_tot = float(np.sum(w * (y == 1)))
    q_tot = s_tot - p_tot
    g_tot = 1.0 - (p_tot * p_tot + q_tot * q_tot) / (s_tot * s_tot)

    feats: list[np.ndarray] = []
    thrs: list[np.ndarray] = []
    reds: list[np.ndarray] = []
    wy = w * (y == 1)
    for j in range(d):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        cut = np.nonzero(sv[1:] != sv[:-1])[0]
        if cut.size == 0:
            continue
        pos_prefix = np.cumsum(wy[order])
        tot_prefix = np.cumsum(w[order])
        p_left = pos_prefix[cut]
        s_left = tot_prefix[cut]
        q_left = s_left - p_left
        p_right = p_tot - p_left
        s_right = s_tot - s_left
        q_right = s_right - p_right
        g_left = 1.0 - (p_left * p_left + q_left * q_left) / (s_left * s_left)
        g_right = 1.0 - (p_right * p_right + q_right * q_right) / (s_right * s_right)
        red = g_tot - (s_left * g_left + s_right * g_right) / s_tot
        thr = (sv[cut] + sv[cut + 1]) * 0.5
        feats.append(np.full(cut.size, j, dtype=np.int64))
        thrs.append(thr)
        reds.append(red)

    if not feats:
        empty = np.empty(0, dtype=np.float64)
        return np.empty(0, dtype=np.int64), empty, empty, g_tot
    return np.concatenate(feats), np.concatenate(thrs), np.concatenate(reds), g_tot


def route_weights(kind, label, opt_ptr, opt_feat, opt_thr, opt_left, opt_right, topo, Q):
    """Propagate per-query weight through a flattened option tree.

    kind[i]: 0 leaf / 1 option node; label[i]: leaf class; options of node i
    are opt_*[opt_ptr[i]:opt_ptr[i+1]]; topo is a topological order starting
    at the root (node 0). Q: (m, d) float64 queries. Returns (w_pos, w_neg).
    Weight flows node-by-node in topo order so the accumulation grouping is
    fixed across backends.
    """
    m = Q.shape[0]
    n_nodes = kind.shape[0]
    w_pos = np.zeros(m, dtype=np.float64)
    w_neg = np.zeros(m, dtype=np.float64)
    inflow: dict[int, np.ndarray] = {int(topo[0]): np.ones(m, dtype=np.float64)}
    for node_ in topo:
        node = int(node_)
        w_in = inflow.pop(node, None)
        if w_in is None:
            continue
        if kind[node] == 0:
            if label[node] == 1:
                w_pos += w_in
            else:
                w_neg += w_in
            continue
        lo, hi = int(opt_ptr[node]), int(opt_ptr[node + 1])
        share = w_in / float(hi - lo)
        for k in range(lo, hi):
            left_mask = Q[:, opt_feat[k]] <= opt_thr[k]
            flow_left = np.where(left_mask, share, 0.0)
            flow_right = share - flow_left
            for child, flow in ((int(opt_left[k]), flow_left), (int(opt_right[k]), flow_right)):
                acc = inflow.get(child)
                if acc is None:
                    inflow[child] = flow.copy()
                else:
                    acc += flow
    return w_pos, w_neg
