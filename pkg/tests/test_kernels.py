import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tutorsmith.whenlearn import _kern_py

_kern = pytest.importorskip("tutorsmith.whenlearn._kern")


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_scan_splits_backends_bit_identical(data):
    n = data.draw(st.integers(2, 40))
    d = data.draw(st.integers(1, 8))
    rng = np.random.Generator(np.random.PCG64(data.draw(st.integers(0, 2**31))))
    X = rng.integers(0, 5, size=(n, d)).astype(np.float64)
    y = rng.integers(0, 2, size=n).astype(np.int8)
    w = rng.integers(1, 4, size=n).astype(np.float64)
    a = _kern.scan_splits(X, y, w)
    b = _kern_py.scan_splits(X, y, w)
    assert np.array_equal(a[0], b[0])
    assert a[1].tobytes() == b[1].tobytes()  # bitwise thresholds
    assert a[2].tobytes() == b[2].tobytes()  # bitwise reductions
    assert a[3] == b[3]


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_route_weights_backends_bit_identical(data):
    from tutorsmith.whenlearn.models import LabeledExample, fit

    seed = data.draw(st.integers(0, 2**31))
    rng = np.random.Generator(np.random.PCG64(seed))
    n = data.draw(st.integers(4, 30))
    d = data.draw(st.integers(2, 6))
    rows = {}
    for _ in range(n):
        vec = tuple(int(v) for v in rng.integers(0, 4, size=d))
        rows[vec] = bool(rng.integers(0, 2))
    examples = [
        LabeledExample({f"f{j}": float(v) for j, v in enumerate(vec)}, lab, (vec,))
        for vec, lab in rows.items()
    ]
    if len({e.label for e in examples}) < 2:
        return
    model = fit("stand", examples, 0)
    Q = rng.integers(-1, 6, size=(50, model.encoder.width)).astype(np.float64)
    for arrays in model.members:
        args = (
            arrays.kind, arrays.label, arrays.opt_ptr, arrays.opt_feat,
            arrays.opt_thr, arrays.opt_left, arrays.opt_right, arrays.topo,
            np.ascontiguousarray(Q),
        )
        pa, na = _kern.route_weights(*args)
        pb, nb = _kern_py.route_weights(*args)
        assert pa.tobytes() == pb.tobytes()
        assert na.tobytes() == nb.tobytes()


def test_bench_runs_and_agrees():
    from tutorsmith.bench import run_bench

    results = run_bench(rows=400, cols=40, repeats=1)
    assert results["scan_splits"]["speedup"] > 0
