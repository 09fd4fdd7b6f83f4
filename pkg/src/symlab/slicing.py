"""Slices of first-order operators along a spectral pair.

Given a validated pair (xi, e) of a first-order operator A, build the
subspaces V_e, Y, X, W_xi^e, the projections onto V_e and W_xi^e and the
restricted operator on the hyperplane orthogonal to xi, written in the
coordinates of a fixed orthonormal basis of that hyperplane.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import (
    DEFAULT_BUDGET,
    Budget,
    SpectralPair,
    complex_ellipticity_constant,
    ellipticity_constant,
    extract_spectral_pair,
    find_witness,
    g_matrix,
    hyperplane_basis,
    mixing_check,
    rank_one_cone_search,
    unit,
    witness_form,
)
from .errors import AnomalyError, NumericalDegeneracyError, OperatorSpecError, UnsupportedOrderError
from .operators import Operator, symbol_matrix
from .tensor_core import (
    DEFAULT_TOL,
    Subspace,
    nullspace,
    numeric_rank,
    subspace_orthocomplement,
    subspace_span,
)

PAIR_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SliceOperator:
    parent: Operator
    pair: SpectralPair
    Ve: Subspace
    Y: Subspace
    X: Subspace
    Wxe: Subspace
    proj_e: np.ndarray
    proj_xe: np.ndarray
    plane_basis: np.ndarray  # (n, n-1) orthonormal basis of the hyperplane orthogonal to xi
    restricted: Operator

    def sub_symbol(self, eta) -> np.ndarray:
        """p_xe o A(eta) restricted to V_e, in parent coordinates (M x N)."""
        return self.proj_xe @ symbol_matrix(self.parent, eta) @ self.proj_e

    def to_parent_direction(self, eta_local) -> np.ndarray:
        return self.plane_basis @ np.asarray(eta_local, dtype=float)

    def to_parent_coordinate(self, f_local) -> np.ndarray:
        return self.Ve.basis @ np.asarray(f_local, dtype=float)

    def to_parent_witness(self, w_local) -> np.ndarray:
        return self.proj_xe.T @ self.Wxe.basis @ np.asarray(w_local, dtype=float)


def _check_first_order(op: Operator):
    if op.order != 1:
        raise UnsupportedOrderError("slices are built for first-order operators; linearize first")


def y_subspace(n: int, N: int, xi, e) -> Subspace:
    """Span of R^n (x) e + xi (x) V* (only xi (x) e when dim V = 1), as flat n x N matrices."""
    xi = np.asarray(xi, dtype=float)
    e = np.asarray(e, dtype=float)
    if N == 1:
        return subspace_span(np.outer(xi, e).ravel()[:, None], DEFAULT_TOL, ambient_dim=n * N)
    cols = [np.outer(z, e).ravel() for z in np.eye(n)]
    cols += [np.outer(xi, v).ravel() for v in np.eye(N)]
    return subspace_span(np.column_stack(cols), DEFAULT_TOL, ambient_dim=n * N)


def slice_projection(op: Operator, Y: Subspace, Wxe: Subspace, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Projection onto W_xi^e whose kernel contains Z = f_A(Y).

    The annihilator of X is intrinsic, but a complement is not; taking the
    kernel to be the image of Y makes p o f_A vanish on the Y-directions for
    any choice of coordinates on W.  Falls back to the orthogonal projection
    when Z meets W_xi^e.
    """
    M = op.dimW
    F = g_matrix(op).T
    Z = subspace_span(F @ Y.basis, tol, ambient_dim=M)
    rest = subspace_orthocomplement(subspace_span(np.column_stack([Z.basis, Wxe.basis]), tol, ambient_dim=M))
    K = np.column_stack([Z.basis, rest.basis])
    basis = np.column_stack([Wxe.basis, K])
    if basis.shape[1] != M or numeric_rank(basis, tol) < M:
        return Wxe.projector
    sel = np.zeros(M)
    sel[:Wxe.dim] = 1.0
    return basis @ np.diag(sel) @ np.linalg.inv(basis)


def build_slice(op: Operator, pair: SpectralPair, tol: float = DEFAULT_TOL) -> SliceOperator:
    _check_first_order(op)
    if op.n < 2:
        raise UnsupportedOrderError("the hyperplane orthogonal to xi is {0} when n = 1")
    xi = np.asarray(pair.xi, dtype=float)
    e = np.asarray(pair.coordinate, dtype=float).ravel()
    if pair.trivial or np.linalg.norm(np.outer(xi, e)) == 0:
        raise OperatorSpecError("a slice needs a non-trivial pair (xi (x) e != 0)")
    n, N, M = op.n, op.dimV, op.dimW
    if N == 1:
        Ve = Subspace.full(1)
    else:
        Ve = subspace_orthocomplement(subspace_span(e[:, None], tol, ambient_dim=N))
    Y = y_subspace(n, N, xi, e)
    Yperp = subspace_orthocomplement(Y)
    G = g_matrix(op)  # flat B_w = G @ w
    X = nullspace(Yperp.basis.T @ G, tol) if Yperp.dim else Subspace.full(M)
    Wxe = subspace_orthocomplement(X)
    if Wxe.is_zero:
        raise NumericalDegeneracyError("W_xi^e is trivial; the parent is probably not elliptic")
    P = slice_projection(op, Y, Wxe, tol)
    T = hyperplane_basis(xi)
    QW, QV = Wxe.basis, Ve.basis
    coeffs = np.stack([QW.T @ P @ symbol_matrix(op, T[:, j]) @ QV for j in range(n - 1)])
    if not np.any(np.abs(coeffs) > 1e-14 * op.scale):
        raise NumericalDegeneracyError("restricted operator vanishes")
    name = f"slice({op.name})" if op.name else "slice"
    restricted = Operator(n - 1, Ve.dim, Wxe.dim, 1, coeffs, name)
    return SliceOperator(op, pair, Ve, Y, X, Wxe, Ve.projector, P, T, restricted)


@dataclass
class SliceReport:
    dims: dict
    dimension_audit: bool
    vanishing_residual: float
    invariance_residual: float
    restriction_residual: float
    bilinear_constant: float
    elliptic: str
    elliptic_constant: float
    complex_elliptic: str | None
    mixing: str | None
    mixing_pairs: int
    containment_residual: float
    containment_failures: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _unit_rows(rng, count, dim):
    z = rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def lift_slice_pair(sl: SliceOperator, local: SpectralPair, tol: float = PAIR_TOL) -> tuple[SpectralPair | None, float]:
    """Map a pair of the restricted operator to a validated pair of the parent.

    The parent witness is the included covector; its direction is recovered
    from the rank-one factorisation of the parent bilinear form.
    """
    w = sl.to_parent_witness(local.witness)
    B = witness_form(sl.parent, w)
    u, s, vh = np.linalg.svd(B)
    if s[0] == 0:
        return None, float("inf")
    pair = extract_spectral_pair(sl.parent, w, u[:, 0] * s[0], tol=tol)
    if pair is None:
        rel = float(s[1] / s[0]) if s.size > 1 else 0.0
        return None, rel
    return pair, pair.residual


def check_slice_properties(op: Operator, pair: SpectralPair, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                           samples: int = 100, parent_mixing: bool | None = None,
                           parent_complex: bool | None = None) -> SliceReport:
    sl = build_slice(op, pair)
    n, N, M = op.n, op.dimV, op.dimW
    scale = op.scale
    rng = np.random.default_rng(seed)
    xi = unit(pair.xi)
    e = np.asarray(pair.coordinate, dtype=float).ravel()
    P, Pe = sl.proj_xe, sl.proj_e

    etas = _unit_rows(rng, samples, n)
    vs = _unit_rows(rng, samples, N)
    A_eta = symbol_matrix(op, etas)
    # vanishing of p_xe o f_A on (xi-line x V), and on (R^n x e-line) when dim V >= 2
    van = np.einsum("ij,sjk,sk->si", P, symbol_matrix(op, np.repeat(xi[None], samples, 0)), vs)
    vals = [np.abs(van).max()]
    if N >= 2:
        vals.append(np.abs(np.einsum("ij,sjk,k->si", P, A_eta, unit(e))).max())
    vanishing = float(max(vals) / scale)

    # the sub-symbol only sees the projection of eta onto the hyperplane
    proj_eta = etas - np.outer(etas @ xi, xi)
    diff = np.einsum("ij,sjk,kl->sil", P, A_eta - symbol_matrix(op, proj_eta), Pe)
    invariance = float(np.abs(diff).max() / scale)

    # p_xe o f_A agrees with f_A on hyperplane x V_e
    vloc = _unit_rows(rng, samples, sl.Ve.dim) @ sl.Ve.basis.T
    f = np.einsum("sjk,sk->sj", symbol_matrix(op, proj_eta), vloc)
    restriction = float(np.abs(f - f @ P.T).max() / scale)

    e_real = ellipticity_constant(sl.restricted, budget, seed)
    bilinear = e_real.constant
    c_status = None
    if parent_complex is None:
        parent_complex = complex_ellipticity_constant(op, budget, seed).is_yes
    if parent_complex:
        c_status = complex_ellipticity_constant(sl.restricted, budget, seed).status
    mix_status, npairs, cont_res, fails = None, 0, 0.0, 0
    if parent_mixing is None:
        parent_mixing = mixing_check(op, budget, seed).verified
    if parent_mixing:
        mix = mixing_check(sl.restricted, budget, seed)
        mix_status = mix.status
        nontriv = [p for p in mix.pairs if not p.trivial]
        npairs = len(nontriv)
        for p in nontriv:
            lifted, res = lift_slice_pair(sl, p)
            if lifted is None:
                fails += 1
                cont_res = max(cont_res, res)
            else:
                cont_res = max(cont_res, lifted.residual)
    dims = {"V_e": sl.Ve.dim, "Y": sl.Y.dim, "X": sl.X.dim, "W_xe": sl.Wxe.dim, "M": M}
    return SliceReport(dims, sl.X.dim + sl.Wxe.dim == M, vanishing, invariance, restriction, float(bilinear),
                       e_real.status, float(e_real.constant), c_status, mix_status, npairs, float(cont_res), fails)


def find_transversal_pair(op: Operator, pair: SpectralPair, budget: Budget = DEFAULT_BUDGET,
                          seed: int = 0) -> SpectralPair:
    """A non-trivial parent pair (eta, f) with eta orthogonal to xi and f in V_e."""
    sl = build_slice(op, pair)
    search = rank_one_cone_search(sl.restricted, budget, seed)
    for local in search.pairs:
        if local.trivial:
            continue
        eta = sl.to_parent_direction(local.xi)
        f = sl.to_parent_coordinate(np.ravel(local.coordinate))
        found, _fit = find_witness(op, eta, f, tol=PAIR_TOL)
        if found is not None:
            return found
    raise AnomalyError("no transversal pair found in the slice within budget")


@dataclass
class Polarization:
    v: np.ndarray
    t: float
    plus: SpectralPair
    minus: SpectralPair


def _try_t(op, xi, eta, e, f, t, tol):
    p, r1 = find_witness(op, xi + eta, e + t * f, tol=tol)
    m, r2 = find_witness(op, xi - eta, e - t * f, tol=tol)
    return p, m, max(r1, r2)


def polarize(op: Operator, pair1: SpectralPair, pair2: SpectralPair, tol: float = PAIR_TOL) -> Polarization:
    """Find v = t f such that (xi + eta, e + v) and (xi - eta, e - v) are both spectral pairs.

    Scans t over +-10^j (j = -6..6) by increasing |t|, then falls back to a
    joint least-squares solve, which is linear in (w+, w-, t).
    """
    _check_first_order(op)
    xi = np.asarray(pair1.xi, dtype=float)
    e = np.asarray(pair1.coordinate, dtype=float).ravel()
    eta = np.asarray(pair2.xi, dtype=float)
    f = np.asarray(pair2.coordinate, dtype=float).ravel()
    if abs(unit(xi) @ unit(eta)) > 1e-10:
        raise OperatorSpecError("second direction must be orthogonal to the first")
    if op.dimV > 1 and abs(unit(e) @ unit(f)) > 1e-10:
        raise OperatorSpecError("second coordinate must annihilate the first")
    grid = sorted((s * 10.0 ** j for j in range(-6, 7) for s in (1.0, -1.0)), key=lambda t: (abs(t), -t))
    for t in grid:
        p, m, _ = _try_t(op, xi, eta, e, f, t, tol)
        if p is not None and m is not None:
            return Polarization(t * f, t, p, m)
    # joint linear solve: G w+ - t (xi+eta)(x)f = (xi+eta)(x)e,  G w- + t (xi-eta)(x)f = (xi-eta)(x)e
    G = g_matrix(op)
    Z = np.zeros_like(G)
    a, b = xi + eta, xi - eta
    lhs = np.block([[G, Z, -np.outer(a, f).ravel()[:, None]],
                    [Z, G, np.outer(b, f).ravel()[:, None]]])
    rhs = np.concatenate([np.outer(a, e).ravel(), np.outer(b, e).ravel()])
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    t = float(sol[-1])
    p, m, _ = _try_t(op, xi, eta, e, f, t, tol)
    if p is not None and m is not None:
        return Polarization(t * f, t, p, m)
    raise AnomalyError("no polarizing coordinate found")
