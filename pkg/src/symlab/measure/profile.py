"""Exact one-dimensional BV profiles.

A profile is a right-continuous function on the line whose derivative
measure is the sum of a piecewise-polynomial density, finitely many atoms
and finitely many rescaled middle-thirds Cantor measures:

    f(x) = base + D((-inf, x]).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial import Polynomial

from .. import kernels
from ..errors import FieldSpecError

PARTS = ("a", "j", "c", "all")


@lru_cache(maxsize=None)
def cantor_moment(k: int) -> float:
    """int_0^1 x^k d(Cantor measure), from self-similarity."""
    if k == 0:
        return 1.0
    acc = sum(comb(k, j) * 2.0 ** (k - j) * cantor_moment(j) for j in range(k))
    return acc / (2.0 * (3.0 ** k - 1.0))


_LEFT = Polynomial([0.0, 1.0 / 3.0])
_RIGHT = Polynomial([2.0 / 3.0, 1.0 / 3.0])


def _cantor_poly(p: Polynomial, lo: float, hi: float, depth: int) -> float:
    if hi <= 0.0 or lo >= 1.0 or hi <= lo:
        return 0.0
    if lo <= 0.0 and hi >= 1.0:
        return float(sum(c * cantor_moment(i) for i, c in enumerate(p.coef)))
    if depth == 0:
        mass = kernels.cantor_scalar(min(hi, 1.0)) - kernels.cantor_scalar(max(lo, 0.0))
        return float(p(0.5 * (max(lo, 0.0) + min(hi, 1.0))) * mass)
    return 0.5 * (_cantor_poly(p(_LEFT), 3.0 * lo, 3.0 * hi, depth - 1)
                  + _cantor_poly(p(_RIGHT), 3.0 * lo - 2.0, 3.0 * hi - 2.0, depth - 1))


def cantor_poly_integral(p: Polynomial, lo: float, hi: float, depth: int = 48) -> float:
    """int_{[lo, hi]} p d(Cantor measure on [0, 1]).

    Recurses on the two similar halves; only branches containing an endpoint
    go deeper, and the truncation error is below 2**-depth * max|p|.
    """
    return _cantor_poly(Polynomial(p.coef), float(lo), float(hi), depth)


def _real_roots_in(p: Polynomial, lo: float, hi: float) -> list[float]:
    p = p.trim(tol=0.0)
    if p.degree() < 1:
        return []
    r = p.roots()
    r = r[np.abs(r.imag) <= 1e-12 * (1.0 + np.abs(r.real))].real
    return sorted(float(x) for x in r if lo < x < hi)


def integrate_abs(p: Polynomial, lo: float, hi: float) -> float:
    """int_lo^hi |p| exactly (splitting at real roots)."""
    if hi <= lo:
        return 0.0
    pts = [lo] + _real_roots_in(p, lo, hi) + [hi]
    P = p.integ()
    return float(sum(abs(P(b) - P(a)) for a, b in zip(pts[:-1], pts[1:])))


@dataclass(frozen=True)
class PiecewisePoly:
    """Non-negative weight function given by polynomial pieces on [l, r) plus an exact pointwise evaluator.

    The pointwise evaluator is used at atoms, where boundary conventions matter.
    """

    pieces: tuple[tuple[float, float, Polynomial], ...]
    pointwise: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def constant(cls, value: float = 1.0) -> "PiecewisePoly":
        return cls(((-np.inf, np.inf, Polynomial([value])),),
                   lambda s: np.full(np.shape(s), float(value)))


@dataclass(frozen=True)
class BVProfile1D:
    ac: tuple = ()        # ((a, b, (c0, c1, ...)), ...) density sum_i c_i x^i on [a, b]
    jumps: tuple = ()     # ((t, h), ...)
    cantor: tuple = ()    # ((a, b, A), ...) A times the Cantor measure carried to [a, b]
    domain: tuple | None = None
    base: float = 0.0

    def __post_init__(self):
        ac = []
        for item in self.ac:
            a, b, coeffs = item
            a, b = float(a), float(b)
            coeffs = tuple(float(c) for c in np.atleast_1d(coeffs))
            if not (np.isfinite(a) and np.isfinite(b) and a < b):
                raise FieldSpecError(f"density interval [{a}, {b}] is not a finite proper interval")
            ac.append((a, b, coeffs))
        jumps: dict[float, float] = {}
        for t, h in self.jumps:
            t, h = float(t), float(h)
            if not (np.isfinite(t) and np.isfinite(h)):
                raise FieldSpecError("jump data must be finite")
            jumps[t] = jumps.get(t, 0.0) + h
        cantor: dict[tuple[float, float], float] = {}
        for a, b, A in self.cantor:
            a, b, A = float(a), float(b), float(A)
            if not (np.isfinite(a) and np.isfinite(b) and a < b and np.isfinite(A)):
                raise FieldSpecError(f"Cantor interval [{a}, {b}] is not a finite proper interval")
            cantor[(a, b)] = cantor.get((a, b), 0.0) + A
        keys = sorted(cantor)
        for (a1, b1), (a2, b2) in zip(keys[:-1], keys[1:]):
            if a2 < b1:
                raise FieldSpecError("Cantor components must sit on identical or non-overlapping intervals")
        object.__setattr__(self, "ac", tuple(ac))
        object.__setattr__(self, "jumps", tuple(sorted((t, h) for t, h in jumps.items() if h != 0.0)))
        object.__setattr__(self, "cantor", tuple((a, b, cantor[(a, b)]) for a, b in keys if cantor[(a, b)] != 0.0))
        if self.domain is not None:
            lo, hi = (float(x) for x in self.domain)
            object.__setattr__(self, "domain", (lo, hi))
        object.__setattr__(self, "base", float(self.base))

    # -- construction ----------------------------------------------------

    @classmethod
    def from_json(cls, data: dict) -> "BVProfile1D":
        try:
            ac = [(p[0], p[1], p[2]) for p in data.get("ac", [])]
            jumps = [tuple(j) for j in data.get("jumps", [])]
            cantor = [tuple(c) for c in data.get("cantor", [])]
        except (TypeError, IndexError) as exc:
            raise FieldSpecError(f"malformed profile: {exc}") from exc
        if any(len(j) != 2 for j in jumps) or any(len(c) != 3 for c in cantor):
            raise FieldSpecError("jumps are [t, h] pairs and Cantor parts are [a, b, A] triples")
        return cls(tuple(ac), tuple(jumps), tuple(cantor), data.get("domain"), data.get("base", 0.0))

    def to_json(self) -> dict:
        out = {
            "ac": [[a, b, list(c)] for a, b, c in self.ac],
            "jumps": [[t, h] for t, h in self.jumps],
            "cantor": [[a, b, A] for a, b, A in self.cantor],
            "base": self.base,
        }
        if self.domain is not None:
            out["domain"] = list(self.domain)
        return out

    def scaled(self, c: float) -> "BVProfile1D":
        return BVProfile1D(tuple((a, b, tuple(c * x for x in co)) for a, b, co in self.ac),
                           tuple((t, c * h) for t, h in self.jumps),
                           tuple((a, b, c * A) for a, b, A in self.cantor),
                           self.domain, c * self.base)

    def pullback(self, s0: float, c: float) -> "BVProfile1D":
        """Profile of t -> f(s0 + c t) (right-continuous representative), c != 0."""
        if c == 0:
            raise ValueError("pullback along a constant map")
        ac = []
        for a, b, co in self.ac:
            p = Polynomial(co)(Polynomial([s0, c])) * abs(c)
            lo, hi = sorted(((a - s0) / c, (b - s0) / c))
            ac.append((lo, hi, tuple(np.sign(c) * p.coef)))
        jumps = tuple(((t - s0) / c, np.sign(c) * h) for t, h in self.jumps)
        cantor = tuple((*sorted(((a - s0) / c, (b - s0) / c)), np.sign(c) * A) for a, b, A in self.cantor)
        base = self.base if c > 0 else self.base + self.total_mass()
        return BVProfile1D(tuple(ac), jumps, cantor, None, base)

    @staticmethod
    def combine(profiles: Iterable["BVProfile1D"]) -> "BVProfile1D":
        profiles = list(profiles)
        return BVProfile1D(tuple(x for p in profiles for x in p.ac),
                           tuple(x for p in profiles for x in p.jumps),
                           tuple(x for p in profiles for x in p.cantor),
                           None, sum(p.base for p in profiles))

    # -- evaluation ------------------------------------------------------

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, co in self.ac:
            inside = (x >= a) & (x < b)
            out = out + np.where(inside, Polynomial(co)(x), 0.0)
        return out

    def cdf(self, x, part: str = "all", left: bool = False) -> np.ndarray:
        """D^part((-inf, x]) (or (-inf, x) when ``left``)."""
        if part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}")
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if part in ("a", "all"):
            for a, b, co in self.ac:
                P = Polynomial(co).integ()
                out = out + P(np.clip(x, a, b)) - P(a)
        if part in ("j", "all"):
            for t, h in self.jumps:
                out = out + h * ((x > t) if left else (x >= t))
        if part in ("c", "all"):
            for a, b, A in self.cantor:
                out = out + A * kernels.cantor_function((x - a) / (b - a))
        return out

    def value(self, x) -> np.ndarray:
        return self.base + self.cdf(x)

    def measure(self, lo, hi, part: str = "all") -> np.ndarray:
        """D^part([lo, hi]) for closed intervals (vectorised; empty when lo > hi)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        m = self.cdf(hi, part) - self.cdf(lo, part, left=True)
        return np.where(hi >= lo, m, 0.0)

    def measure_exact(self, lo, hi, part: str = "all") -> float:
        """D^part([lo, hi]) with rational endpoints (``Fraction``) handled exactly in the Cantor part."""
        if hi < lo:
            return 0.0
        out = 0.0
        if part in ("a", "j", "all"):
            for sub in (("a",) if part == "a" else ("j",) if part == "j" else ("a", "j")):
                out += float(self.measure(float(lo), float(hi), sub))
        if part in ("c", "all"):
            for a, b, A in self.cantor:
                fa, fb = Fraction(a), Fraction(b)
                out += A * (kernels.cantor_scalar((Fraction(hi) - fa) / (fb - fa))
                            - kernels.cantor_scalar((Fraction(lo) - fa) / (fb - fa)))
        return float(out)

    def total_mass(self) -> float:
        return float(sum(Polynomial(co).integ()(b) - Polynomial(co).integ()(a) for a, b, co in self.ac)
                     + sum(h for _, h in self.jumps) + sum(A for *_, A in self.cantor))

    def _ac_cells(self) -> list[tuple[float, float, Polynomial]]:
        """Disjoint cells with the summed density polynomial."""
        if not self.ac:
            return []
        pts = sorted({x for a, b, _ in self.ac for x in (a, b)})
        cells = []
        for l, r in zip(pts[:-1], pts[1:]):
            p = Polynomial([0.0])
            for a, b, co in self.ac:
                if a <= l and r <= b:
                    p = p + Polynomial(co)
            if np.any(p.coef):
                cells.append((l, r, p))
        return cells

    def total_variation(self, lo: float = -np.inf, hi: float = np.inf, part: str = "all") -> float:
        """|D^part|([lo, hi])."""
        tv = 0.0
        if part in ("a", "all"):
            for l, r, p in self._ac_cells():
                tv += integrate_abs(p, max(l, lo), min(r, hi))
        if part in ("j", "all"):
            tv += sum(abs(h) for t, h in self.jumps if lo <= t <= hi)
        if part in ("c", "all"):
            for a, b, A in self.cantor:
                frac = kernels.cantor_scalar((min(hi, b) - a) / (b - a)) - kernels.cantor_scalar((max(lo, a) - a) / (b - a))
                tv += abs(A) * max(frac, 0.0)
        return float(tv)

    def integrate(self, weight: PiecewisePoly, part: str = "all", absolute: bool = False) -> float:
        """int weight d(D^part), or int weight d|D^part| when ``absolute``."""
        total = 0.0
        if part in ("a", "all"):
            cells = self._ac_cells() if absolute else [(a, b, Polynomial(co)) for a, b, co in self.ac]
            for a, b, p in cells:
                for l, r, q in weight.pieces:
                    lo, hi = max(a, l), min(b, r)
                    if hi <= lo:
                        continue
                    if absolute:
                        pts = [lo] + _real_roots_in(p, lo, hi) + [hi]
                        for x0, x1 in zip(pts[:-1], pts[1:]):
                            sgn = np.sign(p(0.5 * (x0 + x1)))
                            total += sgn * float((p * q).integ()(x1) - (p * q).integ()(x0))
                    else:
                        P = (p * q).integ()
                        total += float(P(hi) - P(lo))
        if part in ("j", "all") and self.jumps:
            t = np.array([t for t, _ in self.jumps])
            h = np.array([h for _, h in self.jumps])
            total += float(np.sum((np.abs(h) if absolute else h) * weight.pointwise(t)))
        if part in ("c", "all"):
            for a, b, A in self.cantor:
                scale = abs(A) if absolute else A
                for l, r, q in weight.pieces:
                    lo, hi = max(a, l), min(b, r)
                    if hi <= lo:
                        continue
                    qx = q(Polynomial([a, b - a]))  # in the unit-interval variable
                    total += scale * cantor_poly_integral(qx, (lo - a) / (b - a), (hi - a) / (b - a))
        return float(total)

    def breakpoints(self) -> list[float]:
        pts = {x for a, b, _ in self.ac for x in (a, b)}
        pts |= {t for t, _ in self.jumps}
        pts |= {x for a, b, _ in self.cantor for x in (a, b)}
        return sorted(pts)

    # -- antiderivatives -------------------------------------------------

    def antiderivative(self, m: int) -> Callable[[np.ndarray], np.ndarray]:
        """Evaluator of an m-fold antiderivative of f (vanishing to order m at a point near the origin).

        Only for profiles without Cantor parts (f is then piecewise polynomial).
        """
        if self.cantor:
            raise FieldSpecError("antiderivatives of profiles with Cantor parts are not supported")
        bps = self.breakpoints()
        if not bps:
            poly = Polynomial([self.base])
            for _ in range(m):
                poly = poly.integ()
            return lambda x: poly(np.asarray(x, dtype=float))
        # cell 0 is (-inf, bps[0]); cell i >= 1 is [bps[i-1], bps[i]) with bps[len] = +inf
        lefts = [bps[0]] + bps
        rights = bps + [np.inf]
        polys = [Polynomial([self.base])]
        for i in range(1, len(bps) + 1):
            L, R = lefts[i], rights[i]
            p = Polynomial([float(self.value(L))])
            for a, b, co in self.ac:
                if a <= L and R <= b:
                    P = Polynomial(co).integ()
                    p = p + P - P(L)
            polys.append(p)
        edges = np.array(bps)
        # integrate outward from a point near the origin so that values (and
        # finite-difference roundoff) stay small
        anchor = min(max(0.0, bps[0]), bps[-1])
        cell = int(np.searchsorted(edges, anchor, side="right"))
        ncell = len(polys)
        for _ in range(m):
            new: list = [None] * ncell
            new[cell] = polys[cell].integ(lbnd=anchor)
            for i in range(cell + 1, ncell):
                L = lefts[i]
                new[i] = polys[i].integ(lbnd=L) + float(new[i - 1](L))
            for i in range(cell - 1, -1, -1):
                R = bps[i]
                new[i] = polys[i].integ(lbnd=R) + float(new[i + 1](R))
            polys = new

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            idx = np.searchsorted(edges, x, side="right")
            out = np.empty_like(x)
            for i, p in enumerate(polys):
                mask = idx == i
                if np.any(mask):
                    out[mask] = p(x[mask])
            return out

        return evaluate


def bv1d_measure(profile: BVProfile1D, B, part: str = "all") -> float:
    """Exact D^part(B) for B a closed interval (lo, hi) or a finite union of them."""
    B = list(B)
    intervals = [tuple(B)] if not isinstance(B[0], (tuple, list, np.ndarray)) else [tuple(iv) for iv in B]
    intervals = sorted((a, b) for a, b in intervals if a <= b)
    merged: list[list] = []
    for a, b in intervals:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    if profile.domain is not None:
        lo, hi = profile.domain
        for a, b in merged:
            if a < lo - 1e-12 or b > hi + 1e-12:
                raise FieldSpecError(f"interval [{a}, {b}] leaves the domain [{lo}, {hi}]")
    return float(sum(profile.measure_exact(a, b, part) if isinstance(a, Fraction) or isinstance(b, Fraction)
                     else profile.measure(a, b, part) for a, b in merged))

