"""Slicing identities for synthetic fields, checked part by part.

Left-hand sides are read off the exact measure A u; right-hand sides
integrate exact one-dimensional section measures over a midpoint grid of
lines (or of stations along xi for hyperplane slicing).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..classify import SpectralPair, hyperplane_basis
from ..errors import FieldSpecError, UnsupportedOrderError
from ..linearize import linearize
from ..operators import Operator, symbol_matrix, tensor_coords
from ..tensor_core import multinomial_weights, pure_power
from .field import SyntheticField, apply_operator_analytic, gradient_field
from .geometry import as_box, line_box_interval, plane_grid, slice_area
from .profile import BVProfile1D

SIGMAS = ("a", "c", "j", "all")
ALIGN_TOL = 1e-8


class DegenerateSlicingWarning(RuntimeWarning):
    """A jump or Cantor hyperplane contains the slicing direction."""


@dataclass
class SlicingReport:
    lhs: dict
    rhs: dict
    abs_err: dict
    lhs_tv: dict = field(default_factory=dict)
    rhs_tv: dict = field(default_factory=dict)
    abs_err_tv: dict = field(default_factory=dict)
    lines: int = 0

    def max_error(self, tv: bool = False) -> float:
        errs = self.abs_err_tv if tv else self.abs_err
        return float(max(errs.values())) if errs else 0.0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _normalise_pair(xi, e) -> tuple[np.ndarray, np.ndarray]:
    # (xi, e) and (xi/|xi|, |xi| e) share their witness
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi)
    return xi / r, r * np.asarray(e, dtype=float).ravel()


def _first_order_setting(op: Operator, f: SyntheticField):
    """(operator acting on U, field U) with U = grad^{k-1} u; the pair refers to the former."""
    if op.order == 1:
        return op, f
    return linearize(op).d_op, gradient_field(f, op.order)


def _section_measures(f: SyntheticField, xi, e, y, t0, t1, part) -> np.ndarray:
    """D^part of t -> <e, u(y + t xi)> on [t0, t1], for each row of y (first-order field)."""
    out = np.zeros(y.shape[0])
    valid = t1 >= t0
    for term in f.terms:
        coef = float(e @ term.b)
        c = float(xi @ term.nu)
        if coef == 0.0 or c == 0.0:
            continue
        s0 = y @ term.nu
        a = np.where(valid, s0 + c * t0, 0.0)
        b = np.where(valid, s0 + c * t1, 0.0)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        out += np.where(valid, coef * np.sign(c) * term.profile.measure(lo, hi, part), 0.0)
    return out


def _section_profile(f: SyntheticField, xi, e, y) -> BVProfile1D:
    parts = []
    for term in f.terms:
        coef = float(e @ term.b)
        c = float(xi @ term.nu)
        if coef == 0.0 or c == 0.0:
            continue
        parts.append(term.profile.pullback(float(y @ term.nu), c).scaled(coef))
    return BVProfile1D.combine(parts)


def section_value(f: SyntheticField, xi, e, y, t) -> np.ndarray:
    """<e, u(y + t xi)> from the exact section profile (first-order field)."""
    xi = np.asarray(xi, dtype=float)
    e = np.asarray(e, dtype=float)
    const = 0.0
    for term in f.terms:
        if float(xi @ term.nu) == 0.0:
            const += float(e @ term.b) * float(term.profile.value(float(y @ term.nu)))
    return const + _section_profile(f, xi, e, y).value(t)


def _check_alignment(f: SyntheticField, xi):
    for term in f.terms:
        p = term.profile
        if (p.jumps or p.cantor) and abs(float(xi @ term.nu)) < ALIGN_TOL:
            warnings.warn("slicing direction lies in a jump or Cantor hyperplane; "
                          "those sections are excluded", DegenerateSlicingWarning, stacklevel=3)


def verify_line_slicing(op: Operator, f: SyntheticField, pair: SpectralPair, B=None, lines: int = 256,
                        total_variation: bool = True) -> SlicingReport:
    """<w, A^s u>(B) against the integral over the hyperplane of D^s of the sections <e, u(y + t xi)>.

    For k >= 2 the pair must be a pair of the linearized operator and the
    sections are those of U = grad^{k-1} u.
    """
    d_op, U = _first_order_setting(op, f)
    B = U.box if B is None else as_box(B)
    xi, e = _normalise_pair(pair.xi, pair.coordinate)
    w = np.asarray(pair.witness, dtype=float)
    if w.shape[0] != d_op.dimW or e.shape[0] != d_op.dimV:
        raise FieldSpecError("pair does not match the (linearized) operator")
    _check_alignment(U, xi)
    rep = apply_operator_analytic(d_op, U)
    T = hyperplane_basis(xi)
    ys, weight = plane_grid(B, T, lines)
    t0, t1 = line_box_interval(ys, xi, B)
    lhs, rhs, err = {}, {}, {}
    for s in SIGMAS:
        lhs[s] = rep.scalar(w, B, s)
        rhs[s] = float(weight * np.sum(_section_measures(U, xi, e, ys, t0, t1, s)))
        err[s] = abs(lhs[s] - rhs[s])
    report = SlicingReport(lhs, rhs, err, lines=lines)
    if total_variation:
        keep = t1 >= t0
        for s in SIGMAS:
            report.lhs_tv[s] = rep.total_variation(w, B, s)
            acc = 0.0
            for y, a, b in zip(ys[keep], t0[keep], t1[keep]):
                acc += _section_profile(U, xi, e, y).total_variation(a, b, s)
            report.rhs_tv[s] = float(weight * acc)
            report.abs_err_tv[s] = abs(report.lhs_tv[s] - report.rhs_tv[s])
    return report


@dataclass
class JumpDensityReport:
    measured: np.ndarray
    expected: np.ndarray
    rel_error: float
    area: float

    def to_json(self) -> dict:
        return {"measured": self.measured.tolist(), "expected": self.expected.tolist(),
                "rel_error": self.rel_error, "area": self.area}


def _contract(F: np.ndarray, nu: np.ndarray, m: int, N: int) -> np.ndarray:
    """<F, nu^{(x) m}> for F with entry coordinates in V (x) E_m (full tensor contraction)."""
    if m == 0:
        return F.reshape(N)
    n = nu.shape[0]
    F = F.reshape(-1, N)
    return (multinomial_weights(n, m) * pure_power(nu, m)) @ F


def verify_jump_density(op: Operator, f: SyntheticField, B=None) -> JumpDensityReport:
    """Jump part of A u against A^k(nu)[jump datum] times the area of the jump patch.

    The datum is the jump of grad^{k-1} u contracted with nu^{k-1}.
    """
    if len(f.terms) != 1 or len(f.terms[0].profile.jumps) != 1:
        raise FieldSpecError("jump density check needs a single term with a single step")
    B = f.box if B is None else as_box(B)
    term = f.terms[0]
    t, h = term.profile.jumps[0]
    k = op.order
    measured = apply_operator_analytic(op, f).evaluate(B, "j")
    F_jump = h * tensor_coords(term.b, term.nu, k - 1)
    delta = _contract(F_jump, term.nu, k - 1, op.dimV)
    area = float(slice_area(B, term.nu, t))
    expected = symbol_matrix(op, term.nu) @ delta * area
    denom = max(float(np.linalg.norm(expected)), 1e-300)
    rel = float(np.linalg.norm(measured - expected) / denom) if np.any(expected) else float(np.linalg.norm(measured))
    return JumpDensityReport(measured, expected, rel, area)


def verify_hyperplane_slicing(op: Operator, f: SyntheticField, pair: SpectralPair, B=None,
                              stations: int = 256) -> SlicingReport:
    """p_xi^e (A u)(B) against the integral along xi of the sliced operator applied to the restricted field.

    Two-dimensional, first order: the hyperplane is a line, so the sliced
    operator is one-dimensional and its action on each restricted field is
    an exact 1-D measure.  Values are compared in coordinates of W_xi^e.
    """
    from ..slicing import build_slice

    if op.order != 1 or op.n != 2:
        raise UnsupportedOrderError("hyperplane slicing is implemented for first-order operators in two variables")
    B = f.box if B is None else as_box(B)
    xi, e = _normalise_pair(pair.xi, pair.coordinate)
    sl = build_slice(op, SpectralPair(xi, e, pair.witness, pair.residual))
    QW, QV = sl.Wxe.basis, sl.Ve.basis
    eta = sl.plane_basis[:, 0]
    B1 = sl.restricted.coeff_array[0]  # (dim W_xe, dim V_e)
    rep = apply_operator_analytic(op, f)
    zs, weight = plane_grid(B, xi[:, None], stations)
    r0, r1 = line_box_interval(zs, eta, B)
    valid = r1 >= r0
    lhs, rhs, err = {}, {}, {}
    for s in SIGMAS:
        lhs_vec = QW.T @ sl.proj_xe @ rep.evaluate(B, s)
        acc = np.zeros(QV.shape[1])
        for term in f.terms:
            c = float(eta @ term.nu)
            if c == 0.0:
                continue
            s0 = zs @ term.nu
            a, b = s0 + c * r0, s0 + c * r1
            m = np.where(valid, term.profile.measure(np.minimum(a, b), np.maximum(a, b), s), 0.0)
            acc += np.sign(c) * float(np.sum(m)) * (QV.T @ term.b)
        rhs_vec = weight * (B1 @ acc)
        lhs[s], rhs[s] = lhs_vec.tolist(), rhs_vec.tolist()
        err[s] = float(np.abs(lhs_vec - rhs_vec).max())
    return SlicingReport(lhs, rhs, err, lines=stations)


def station_integrand(op: Operator, f: SyntheticField, pair: SpectralPair, z, B=None) -> np.ndarray:
    """The sliced operator applied to the restricted field at station z (ambient point on the xi-line)."""
    from ..slicing import build_slice

    B = f.box if B is None else as_box(B)
    xi, e = _normalise_pair(pair.xi, pair.coordinate)
    sl = build_slice(op, SpectralPair(xi, e, pair.witness, pair.residual))
    eta = sl.plane_basis[:, 0]
    z = np.atleast_2d(np.asarray(z, dtype=float))
    r0, r1 = line_box_interval(z, eta, B)
    acc = np.zeros((z.shape[0], sl.Ve.dim))
    for term in f.terms:
        c = float(eta @ term.nu)
        if c == 0.0:
            continue
        s0 = z @ term.nu
        a, b = s0 + c * r0, s0 + c * r1
        m = np.where(r1 >= r0, term.profile.measure(np.minimum(a, b), np.maximum(a, b)), 0.0)
        acc += np.sign(c) * np.outer(m, sl.Ve.basis.T @ term.b)
    return acc @ sl.restricted.coeff_array[0].T
