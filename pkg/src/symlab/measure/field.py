"""Synthetic plane-wave BV fields and the exact measure A u.

A field is u(x) = sum_p b_p G_p(x . nu_p) with unit normals nu_p.  For an
operator of order k the stored profile g_p is G_p^{(k-1)}, so that

    A u = sum_p A^k(nu_p) b_p  (x)  (D g_p)(x . nu_p),

split into absolutely continuous, jump and Cantor parts by the profile.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import FieldSpecError
from ..operators import Operator, symbol_matrix, tensor_coords
from .geometry import area_function, as_box
from .profile import PARTS, BVProfile1D, PiecewisePoly


@dataclass(frozen=True)
class FieldTerm:
    nu: np.ndarray
    b: np.ndarray
    profile: BVProfile1D


@dataclass(frozen=True)
class SyntheticField:
    n: int
    dimV: int
    terms: tuple[FieldTerm, ...]
    box: np.ndarray

    def __post_init__(self):
        terms = []
        for t in self.terms:
            nu = np.asarray(t.nu, dtype=float)
            b = np.asarray(t.b, dtype=float)
            if nu.shape != (self.n,) or b.shape != (self.dimV,):
                raise FieldSpecError(f"term has nu of shape {nu.shape} and b of shape {b.shape}; "
                                     f"expected ({self.n},) and ({self.dimV},)")
            if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
                raise FieldSpecError("term normals must be unit vectors")
            terms.append(FieldTerm(nu, b, t.profile))
        box = as_box(self.box)
        if box.shape[0] != self.n:
            raise FieldSpecError(f"box has {box.shape[0]} sides, expected {self.n}")
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "box", box)

    @classmethod
    def from_json(cls, data: dict) -> "SyntheticField":
        try:
            n, dimV = int(data["n"]), int(data["dimV"])
            terms = tuple(FieldTerm(np.asarray(t["nu"], float), np.asarray(t["b"], float),
                                    BVProfile1D.from_json(t["profile"])) for t in data["terms"])
            box = data["box"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FieldSpecError(f"field JSON is missing or has an invalid field: {exc}") from exc
        return cls(n, dimV, terms, box)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dimV": self.dimV,
            "terms": [{"nu": t.nu.tolist(), "b": t.b.tolist(), "profile": t.profile.to_json()} for t in self.terms],
            "box": self.box.tolist(),
        }

    def value(self, x, order: int = 1) -> np.ndarray:
        """u at points x (P, n) for the given operator order (profiles are (order-1)-th derivatives)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros((x.shape[0], self.dimV))
        for t in self.terms:
            s = x @ t.nu
            g = t.profile.value(s) if order == 1 else t.profile.antiderivative(order - 1)(s)
            out += np.outer(g, t.b)
        return out


def load_field(path: str) -> SyntheticField:
    with open(path) as fh:
        return SyntheticField.from_json(json.load(fh))


def gradient_field(f: SyntheticField, order: int) -> SyntheticField:
    """The field U = grad^{order-1} u, as a first-order field with values in V (x) E_{order-1}.

    Each plane wave b G(x . nu) has (order-1)-th gradient (b (x) nu^{order-1}) g(x . nu).
    """
    if order == 1:
        return f
    terms = tuple(FieldTerm(t.nu, tensor_coords(t.b, t.nu, order - 1), t.profile) for t in f.terms)
    return SyntheticField(f.n, terms[0].b.shape[0] if terms else f.dimV, terms, f.box)


@dataclass(frozen=True)
class MeasureTerm:
    nu: np.ndarray
    weight: np.ndarray      # A^k(nu) b, in W
    profile: BVProfile1D    # derivative measure is the 1-D factor


@dataclass(frozen=True)
class MeasureRep:
    n: int
    dimW: int
    terms: tuple[MeasureTerm, ...] = field(default_factory=tuple)

    def density(self, x) -> np.ndarray:
        """Absolutely continuous density at points x (P, n), values in W."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros((x.shape[0], self.dimW))
        for t in self.terms:
            out += np.outer(t.profile.density(x @ t.nu), t.weight)
        return out

    def jump_planes(self) -> list[tuple[np.ndarray, float, np.ndarray]]:
        """(nu, t, weight per unit area) for each jump hyperplane {x . nu = t}."""
        return [(t.nu, s, h * t.weight) for t in self.terms for s, h in t.profile.jumps]

    def cantor_parts(self) -> list[tuple[np.ndarray, tuple[float, float, float], np.ndarray]]:
        return [(t.nu, c, t.weight) for t in self.terms for c in t.profile.cantor]

    def evaluate(self, box, part: str = "all") -> np.ndarray:
        """A^part u (box), exact up to rounding."""
        if part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}")
        out = np.zeros(self.dimW)
        for t in self.terms:
            out += t.weight * t.profile.integrate(area_function(box, t.nu), part)
        return out

    def scalar(self, w, box, part: str = "all") -> float:
        return float(np.asarray(w, dtype=float) @ self.evaluate(box, part))

    def scalar_groups(self, w) -> list[tuple[np.ndarray, BVProfile1D]]:
        """Terms of <w, A u> merged by normal direction (nu and -nu are identified)."""
        w = np.asarray(w, dtype=float)
        groups: list[tuple[np.ndarray, list[BVProfile1D]]] = []
        for t in self.terms:
            c = float(w @ t.weight)
            if c == 0.0:
                continue
            for nu, profs in groups:
                if np.allclose(nu, t.nu, atol=1e-12):
                    profs.append(t.profile.scaled(c))
                    break
                if np.allclose(nu, -t.nu, atol=1e-12):
                    profs.append(t.profile.pullback(0.0, -1.0).scaled(-c))
                    break
            else:
                groups.append((t.nu, [t.profile.scaled(c)]))
        return [(nu, BVProfile1D.combine(p)) for nu, p in groups]

    def total_variation(self, w, box, part: str = "all") -> float:
        """|<w, A^part u>| (box).

        Plane waves in different directions are mutually singular in their jump
        and Cantor parts; absolutely continuous parts in different directions
        would need a genuine n-dimensional integral and are rejected.
        """
        groups = self.scalar_groups(w)
        if part in ("a", "all") and sum(1 for _, p in groups if p.ac) > 1:
            raise FieldSpecError("total variation of superposed densities in different directions is not supported")
        return float(sum(p.integrate(area_function(box, nu), part, absolute=True) for nu, p in groups))


def apply_operator_analytic(op: Operator, f: SyntheticField) -> MeasureRep:
    """Exact A u for a synthetic field; profiles are read as (k-1)-th derivatives of the waves."""
    if op.n != f.n or op.dimV != f.dimV:
        raise FieldSpecError(f"field (n={f.n}, N={f.dimV}) does not match operator (n={op.n}, N={op.dimV})")
    terms = tuple(MeasureTerm(t.nu, symbol_matrix(op, t.nu) @ t.b, t.profile) for t in f.terms)
    return MeasureRep(f.n, op.dimW, terms)


def _central(order: int, h: float) -> list[tuple[float, float]]:
    """(offset, weight) of the second-order accurate central stencil for d^order/dx^order."""
    one = [(-h, -0.5 / h), (h, 0.5 / h)]
    two = [(-h, 1.0 / h ** 2), (0.0, -2.0 / h ** 2), (h, 1.0 / h ** 2)]
    stencil = [(0.0, 1.0)]
    for _ in range(order // 2):
        stencil = [(a + b, u * v) for a, u in stencil for b, v in two]
    if order % 2:
        stencil = [(a + b, u * v) for a, u in stencil for b, v in one]
    merged: dict[float, float] = {}
    for a, u in stencil:
        key = round(a / h) * h
        merged[key] = merged.get(key, 0.0) + u
    return [(a, u) for a, u in merged.items() if u != 0.0]


def finite_difference_crosscheck(op: Operator, f: SyntheticField, points, h: float = 1e-3) -> float:
    """Max relative difference between a central-difference A u and the analytic density.

    Profiles must be purely absolutely continuous (no jumps or Cantor parts).
    """
    for t in f.terms:
        if t.profile.jumps or t.profile.cantor:
            raise FieldSpecError("finite differences need purely absolutely continuous profiles")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = op.order
    reach = h * (k // 2 + k % 2)
    lo, hi = f.box[:, 0] + reach, f.box[:, 1] - reach
    if np.any(pts < lo) or np.any(pts > hi):
        raise FieldSpecError("sample points are too close to the box boundary for the stencil")
    fd = np.zeros((pts.shape[0], op.dimW))
    eye = np.eye(op.n)
    for alpha, A in op.coeffs.items():
        stencil = [(np.zeros(op.n), 1.0)]
        for j, m in enumerate(alpha):
            if m:
                stencil = [(off + a * eye[j], u * v) for off, u in stencil for a, v in _central(m, h)]
        d = np.zeros((pts.shape[0], op.dimV))
        for off, u in stencil:
            d += u * f.value(pts + off, order=k)
        fd += d @ A.T
    exact = apply_operator_analytic(op, f).density(pts)
    ref = max(float(np.abs(exact).max()), 1e-300)
    return float(np.abs(fd - exact).max() / ref)
