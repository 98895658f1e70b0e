"""Interpolation kernel tests against the independent 8-corner oracle."""

import math
import random

import numpy as np
import pytest

from hybridscale._kernels import BACKEND, interp3, locate
from hybridscale._kernels import _grid_py

from .oracles import trilinear_oracle

try:
    from hybridscale._kernels import _grid_cy
except ImportError:
    _grid_cy = None

BACKENDS = [("python", _grid_py)] + ([("cython", _grid_cy)] if _grid_cy else [])


def _grid():
    b = np.array([1.0, 2.0, 4.0, 8.0])
    s = np.array([25.0, 50.0, 75.0, 100.0])
    q = np.array([10.0, 40.0, 70.0, 100.0])
    rng = random.Random(7)
    v = np.array([[[10.0 + 5 * bi + 2 * (3 - si) + (3 - qi) + rng.random()
                    for qi in range(4)] for si in range(4)] for bi in range(4)])
    return b, s, q, np.ascontiguousarray(v)


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_exact_at_every_node(name, mod):
    b, s, q, v = _grid()
    for bi, bv in enumerate(b):
        for si, sv in enumerate(s):
            for qi, qv in enumerate(q):
                assert mod.interp3(b, s, q, v, bv, sv, qv) == v[bi, si, qi]


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_matches_corner_oracle_at_random_interior_points(name, mod):
    b, s, q, v = _grid()
    rng = random.Random(42)
    for _ in range(1000):
        pb = rng.uniform(b[0], b[-1])
        ps = rng.uniform(s[0], s[-1])
        pq = rng.uniform(q[0], q[-1])
        got = mod.interp3(b, s, q, v, pb, ps, pq)
        want = trilinear_oracle(b, s, q, v, pb, ps, pq)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_quota_midpoint_is_arithmetic_mean():
    b = np.array([1.0])
    s = np.array([50.0])
    q = np.array([20.0, 40.0])
    v = np.array([[[20.0, 30.0]]])
    assert interp3(b, s, q, v, 1.0, 50.0, 30.0) == 25.0


def test_clamps_outside_sm_quota_range():
    b, s, q, v = _grid()
    assert interp3(b, s, q, v, 1.0, 5.0, 50.0) == interp3(b, s, q, v, 1.0, 25.0, 50.0)
    assert interp3(b, s, q, v, 1.0, 50.0, 300.0) == interp3(b, s, q, v, 1.0, 50.0, 100.0)


def test_locate_brackets_and_node_hits():
    axis = np.array([10.0, 20.0, 40.0])
    assert locate(axis, 10.0) == (0, 0, 0.0)
    assert locate(axis, 20.0) == (1, 1, 0.0)
    assert locate(axis, 40.0) == (2, 2, 0.0)
    lo, hi, t = locate(axis, 25.0)
    assert (lo, hi) == (1, 2) and t == pytest.approx(0.25)
    assert locate(axis, 5.0) == (0, 0, 0.0)
    assert locate(axis, 99.0) == (2, 2, 0.0)


@pytest.mark.skipif(_grid_cy is None, reason="compiled kernel not built")
def test_backends_produce_identical_doubles():
    b, s, q, v = _grid()
    rng = random.Random(3)
    for _ in range(500):
        point = (rng.uniform(1, 8), rng.uniform(10, 110), rng.uniform(5, 110))
        a = _grid_py.interp3(b, s, q, v, *point)
        c = _grid_cy.interp3(b, s, q, v, *point)
        assert a == c or math.isclose(a, c, rel_tol=1e-15)


def test_active_backend_reported():
    assert BACKEND in ("cython", "python")
