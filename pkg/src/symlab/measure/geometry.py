"""Axis-aligned boxes cut by hyperplanes and lines."""
from __future__ import annotations

from itertools import product
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial

from ..errors import FieldSpecError
from .profile import PiecewisePoly


def as_box(box) -> np.ndarray:
    b = np.asarray(box, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2 or np.any(b[:, 1] < b[:, 0]):
        raise FieldSpecError("a box is a list of [lo, hi] pairs with lo <= hi")
    return b


def box_vertices(box) -> np.ndarray:
    box = as_box(box)
    return np.array(list(product(*box)))


def slice_area(box, nu, s) -> np.ndarray:
    """(n-1)-dimensional area of box intersected with {x . nu = s}, for unit nu (vectorised in s).

    Components of nu that vanish contribute the box width as a factor; on the
    remaining coordinates (reflected so that nu > 0) the area is the
    derivative of the half-space volume, an alternating sum over vertices.
    The closed box is used, so an axis-aligned face counts with full area.
    """
    box = as_box(box)
    nu = np.asarray(nu, dtype=float)
    s = np.asarray(s, dtype=float)
    active = np.abs(nu) > 1e-14
    if not np.any(active):
        raise FieldSpecError("normal vector vanishes")
    factor = float(np.prod(box[~active, 1] - box[~active, 0]))
    sign = np.sign(nu[active])
    sub = box[active] * sign[:, None]
    sub = np.sort(sub, axis=1)
    w = np.abs(nu[active])
    m = w.shape[0]
    if m == 1:
        lo, hi = sub[0] * w[0]
        return factor * ((s >= lo) & (s <= hi)).astype(float)
    total = np.zeros_like(s)
    denom = factorial(m - 1) * float(np.prod(w))
    for corner in product((0, 1), repeat=m):
        v = sub[np.arange(m), corner]
        sgn = -1.0 if sum(corner) % 2 else 1.0
        total = total + sgn * np.maximum(s - w @ v, 0.0) ** (m - 1)
    return factor * np.maximum(total / denom, 0.0)


def area_breakpoints(box, nu) -> np.ndarray:
    vals = box_vertices(box) @ np.asarray(nu, dtype=float)
    return np.unique(np.round(vals, 15))


def area_function(box, nu) -> PiecewisePoly:
    """Slice area as polynomial pieces between vertex levels, plus the exact evaluator."""
    box = as_box(box)
    nu = np.asarray(nu, dtype=float)
    bps = area_breakpoints(box, nu)
    deg = int(np.sum(np.abs(nu) > 1e-14)) - 1
    pieces = []
    for l, r in zip(bps[:-1], bps[1:]):
        if r - l <= 0:
            continue
        xs = l + (r - l) * (np.arange(deg + 1) + 0.5) / (deg + 1)
        ys = slice_area(box, nu, xs)
        if deg == 0:
            poly = Polynomial([float(ys[0])])
        else:
            poly = Polynomial.fit(xs, ys, deg, domain=[l, r]).convert(domain=[-1, 1], window=[-1, 1])
        pieces.append((float(l), float(r), poly))
    return PiecewisePoly(tuple(pieces), lambda t: slice_area(box, nu, t))


def line_box_interval(y, xi, box) -> tuple[np.ndarray, np.ndarray]:
    """Parameter interval [t0, t1] of {y + t xi} inside the box, per row of y (t0 > t1 when empty)."""
    box = as_box(box)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    xi = np.asarray(xi, dtype=float)
    t0 = np.full(y.shape[0], -np.inf)
    t1 = np.full(y.shape[0], np.inf)
    for i in range(box.shape[0]):
        if abs(xi[i]) > 0:
            a = (box[i, 0] - y[:, i]) / xi[i]
            b = (box[i, 1] - y[:, i]) / xi[i]
            t0 = np.maximum(t0, np.minimum(a, b))
            t1 = np.minimum(t1, np.maximum(a, b))
        else:
            out = (y[:, i] < box[i, 0]) | (y[:, i] > box[i, 1])
            t0 = np.where(out, np.inf, t0)
            t1 = np.where(out, -np.inf, t1)
    return t0, t1


def plane_grid(box, basis: np.ndarray, count: int) -> tuple[np.ndarray, float]:
    """Midpoint grid on the projection of the box onto span(basis) (orthonormal columns).

    Returns ambient points (P, n) and the cell weight.
    """
    verts = box_vertices(box) @ basis  # (2^n, d)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    d = basis.shape[1]
    axes = [lo[j] + (hi[j] - lo[j]) * (np.arange(count) + 0.5) / count for j in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    weight = float(np.prod((hi - lo) / count))
    return mesh @ basis.T, weight
