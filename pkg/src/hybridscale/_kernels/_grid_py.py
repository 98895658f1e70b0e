"""Pure-Python trilinear interpolation kernel.

Fallback used when the compiled extension is unavailable. The arithmetic
(bracketing, lerp order, clamping) mirrors _grid_cy.pyx expression for
expression so both backends produce the same doubles.
"""

from __future__ import annotations


def locate(axis, x: float) -> tuple[int, int, float]:
    """Bracketing indices and fractional offset for x on an ascending axis.

    Clamps outside the axis range; returns t == 0.0 exactly when x sits on
    a grid node, so interpolation reproduces node values bit-for-bit.
    """
    n = len(axis)
    if x <= axis[0]:
        return 0, 0, 0.0
    last = n - 1
    if x >= axis[last]:
        return last, last, 0.0
    lo = 0
    hi = last
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if axis[mid] <= x:
            lo = mid
        else:
            hi = mid
    if axis[lo] == x:
        return lo, lo, 0.0
    t = (x - axis[lo]) / (axis[hi] - axis[lo])
    return lo, hi, t


def interp3(b_axis, s_axis, q_axis, values, b: float, s: float, q: float) -> float:
    """Trilinear interpolation of values[batch, sm, quota] at (b, s, q).

    values is a C-contiguous float64 ndarray shaped
    (len(b_axis), len(s_axis), len(q_axis)). Coordinates outside an axis
    range clamp to the nearest bound.
    """
    i0, i1, tb = locate(b_axis, b)
    j0, j1, ts = locate(s_axis, s)
    k0, k1, tq = locate(q_axis, q)

    v = values
    c00 = v[i0, j0, k0] + (v[i0, j0, k1] - v[i0, j0, k0]) * tq
    c01 = v[i0, j1, k0] + (v[i0, j1, k1] - v[i0, j1, k0]) * tq
    c10 = v[i1, j0, k0] + (v[i1, j0, k1] - v[i1, j0, k0]) * tq
    c11 = v[i1, j1, k0] + (v[i1, j1, k1] - v[i1, j1, k0]) * tq
    c0 = c00 + (c01 - c00) * ts
    c1 = c10 + (c11 - c10) * ts
    return float(c0 + (c1 - c0) * tb)


def interp3_many(b_axis, s_axis, q_axis, values, coords, out) -> None:
    """Batched interp3 over coords[n, 3] into out[n]; benchmark helper."""
    for i in range(len(out)):
        out[i] = interp3(b_axis, s_axis, q_axis, values,
                         coords[i, 0], coords[i, 1], coords[i, 2])
