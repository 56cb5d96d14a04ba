"""Benchmark the compiled kernels against the pure-numpy fallback.

Covers the two hot paths (split scanning during fits, weight routing during
batch prediction) and asserts the backends agree bit-for-bit while timing
them, so the speedup claim and the equivalence claim travel together.
"""

from __future__ import annotations

import time

import numpy as np

from .whenlearn import _kern_py
from .whenlearn import backend as backend_mod
from .whenlearn.encode import Encoder, FeatureTable
from .whenlearn.models import fit


def _synthetic(rows: int, cols: int, seed: int = 7):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.integers(0, 6, size=(rows, cols)).astype(np.float64)
    w = np.ones(rows)
    target = (X[:, 0] + X[:, 1] > 5) & (X[:, 2] < 3)
    y = target.astype(np.int8)
    return X, y, w


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(rows: int = 2000, cols: int = 150, repeats: int = 5) -> dict:
    try:
        from .whenlearn import _kern
    except ImportError:
        print("compiled kernel not built; only the pure backend is available")
        return {}
    X, y, w = _synthetic(rows, cols)

    # split scan
    a = _kern.scan_splits(X, y, w)
    b = _kern_py.scan_splits(X, y, w)
    for u, v in zip(a[:3], b[:3]):
        assert np.array_equal(u, v), "backend mismatch in scan_splits"
    t_scan_c = _time(lambda: _kern.scan_splits(X, y, w), repeats)
    t_scan_py = _time(lambda: _kern_py.scan_splits(X, y, w), repeats)

    # routing through a fitted stand model
    rows_dicts = [
        {f"f{j}": float(X[i, j]) for j in range(cols)} for i in range(min(rows, 500))
    ]
    labels = [bool(y[i]) for i in range(min(rows, 500))]
    from .whenlearn.models import LabeledExample

    model = fit(
        "stand",
        [LabeledExample(r, lab, (i,)) for i, (r, lab) in enumerate(zip(rows_dicts, labels))],
        seed=0,
    )
    table = FeatureTable.from_rows(rows_dicts * 4)
    Q = model.encoder.transform(table)
    arrays = model.members[0]
    args = (
        arrays.kind, arrays.label, arrays.opt_ptr, arrays.opt_feat,
        arrays.opt_thr, arrays.opt_left, arrays.opt_right, arrays.topo, Q,
    )
    ra = _kern.route_weights(*args)
    rb = _kern_py.route_weights(*args)
    assert np.array_equal(ra[0], rb[0]) and np.array_equal(ra[1], rb[1]), (
        "backend mismatch in route_weights"
    )
    t_route_c = _time(lambda: _kern.route_weights(*args), repeats)
    t_route_py = _time(lambda: _kern_py.route_weights(*args), repeats)

    results = {
        "active_backend": backend_mod.BACKEND_NAME,
        "scan_splits": {"compiled_s": t_scan_c, "python_s": t_scan_py,
                        "speedup": t_scan_py / t_scan_c},
        "route_weights": {"compiled_s": t_route_c, "python_s": t_route_py,
                          "speedup": t_route_py / t_route_c},
    }
    print(f"active backend: {results['active_backend']}")
    print(
        f"scan_splits   ({rows}x{cols}): compiled {t_scan_c*1e3:8.2f} ms"
        f"   python {t_scan_py*1e3:8.2f} ms   speedup {t_scan_py/t_scan_c:5.1f}x"
    )
    print(
        f"route_weights ({Q.shape[0]}q):  compiled {t_route_c*1e3:8.2f} ms"
        f"   python {t_route_py*1e3:8.2f} ms   speedup {t_route_py/t_route_c:5.1f}x"
    )
    print("backends agree bit-for-bit on both kernels")
    return results
