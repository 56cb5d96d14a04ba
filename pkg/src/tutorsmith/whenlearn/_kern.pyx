# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: gini split scanning and option-tree weight routing.

Mirrors _kern_py.py operation-for-operation; both backends must return
bit-identical arrays (see tests/test_kernels.py).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def scan_splits(cnp.ndarray[cnp.float64_t, ndim=2] X,
                cnp.ndarray[cnp.int8_t, ndim=1] y,
                cnp.ndarray[cnp.float64_t, ndim=1] w):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef double s_tot = 0.0, p_tot = 0.0
    cdef Py_ssize_t i, j, k
    for i in range(n):
        s_tot += w[i]
        if y[i] == 1:
            p_tot += w[i]
    cdef double q_tot = s_tot - p_tot
    cdef double g_tot = 1.0 - (p_tot * p_tot + q_tot * q_tot) / (s_tot * s_tot)

    # worst case one candidate per adjacent pair per feature
    cdef cnp.ndarray[cnp.int64_t, ndim=1] feat = np.empty(d * max(n - 1, 0), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] thr = np.empty(d * max(n - 1, 0), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] red = np.empty(d * max(n - 1, 0), dtype=np.float64)
    cdef Py_ssize_t out = 0

    cdef cnp.ndarray[cnp.int64_t, ndim=1] order
    cdef double p_left, s_left, q_left, p_right, s_right, q_right
    cdef double g_left, g_right, v, nxt
    cdef Py_ssize_t oi
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        p_left = 0.0
        s_left = 0.0
        for k in range(n - 1):
            oi = order[k]
            s_left += w[oi]
            if y[oi] == 1:
                p_left += w[oi]
            v = X[oi, j]
            nxt = X[order[k + 1], j]
            if v == nxt:
                continue
            q_left = s_left - p_left
            p_right = p_tot - p_left
            s_right = s_tot - s_left
            q_right = s_right - p_right
            g_left = 1.0 - (p_left * p_left + q_left * q_left) / (s_left * s_left)
            g_right = 1.0 - (p_right * p_right + q_right * q_right) / (s_right * s_right)
            feat[out] = j
            thr[out] = (v + nxt) * 0.5
            red[out] = g_tot - (s_left * g_left + s_right * g_right) / s_tot
            out += 1
    return feat[:out].copy(), thr[:out].copy(), red[:out].copy(), g_tot


def route_weights(cnp.ndarray[cnp.int8_t, ndim=1] kind,
                  cnp.ndarray[cnp.int8_t, ndim=1] label,
                  cnp.ndarray[cnp.int64_t, ndim=1] opt_ptr,
                  cnp.ndarray[cnp.int64_t, ndim=1] opt_feat,
                  cnp.ndarray[cnp.float64_t, ndim=1] opt_thr,
                  cnp.ndarray[cnp.int64_t, ndim=1] opt_left,
                  cnp.ndarray[cnp.int64_t, ndim=1] opt_right,
                  cnp.ndarray[cnp.int64_t, ndim=1] topo,
                  cnp.ndarray[cnp.float64_t, ndim=2] Q):
    cdef Py_ssize_t m = Q.shape[0]
    cdef Py_ssize_t n_nodes = kind.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_pos = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_neg = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] inflow = np.zeros((n_nodes, m), dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] touched = np.zeros(n_nodes, dtype=np.uint8)

    cdef Py_ssize_t root = topo[0]
    cdef Py_ssize_t t, node, k, q, child_l, child_r, f
    cdef double share, win, flow_l
    cdef double tval
    for q in range(m):
        inflow[root, q] = 1.0
    touched[root] = 1

    for t in range(topo.shape[0]):
        node = topo[t]
        if not touched[node]:
            continue
        if kind[node] == 0:
            if label[node] == 1:
                for q in range(m):
                    w_pos[q] += inflow[node, q]
            else:
                for q in range(m):
                    w_neg[q] += inflow[node, q]
            continue
        for k in range(opt_ptr[node], opt_ptr[node + 1]):
            f = opt_feat[k]
            tval = opt_thr[k]
            child_l = opt_left[k]
            child_r = opt_right[k]
            touched[child_l] = 1
            touched[child_r] = 1
            for q in range(m):
                win = inflow[node, q]
                share = win / <double>(opt_ptr[node + 1] - opt_ptr[node])
                if Q[q, f] <= tval:
                    flow_l = share
                else:
                    flow_l = 0.0
                inflow[child_l, q] += flow_l
                inflow[child_r, q] += share - flow_l
    return w_pos, w_neg
