"""Structural classification of operators.

Ellipticity (real and complex), the canceling condition, the essential range,
directional/tensor spectral pairs and the rank-one (mixing) property.  All
searches are semi-decisions: positive answers carry validated witnesses,
negative ones are reported as "not found within budget".
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.stats import norm, qmc

from . import kernels
from .errors import NotEllipticError, NumericalDegeneracyError, UnsupportedOrderError
from .operators import Operator, linearized_symbol, symbol_matrix, tensor_coords
from .tensor_core import (
    DEFAULT_TOL,
    Subspace,
    multiindex_enumerate,
    multiindex_position,
    numeric_rank,
    pure_power,
    subspace_intersect,
    subspace_orthocomplement,
    subspace_span,
    subspace_sum,
    sym_dim,
)

log = logging.getLogger(__name__)

PAIR_TOL = 1e-8


@dataclass(frozen=True)
class Budget:
    sphere_samples: int | None = None  # None: 4096 for dim <= 3, 32768 above
    refine_starts: int = 10
    refine_iters: int = 500
    random_directions: int = 64
    stable_run: int = 50
    restarts: int = 200
    validation_samples: int = 64

    def samples_for(self, n: int) -> int:
        if self.sphere_samples is not None:
            return self.sphere_samples
        return 4096 if n <= 3 else 32768

    def to_json(self) -> dict:
        return {
            "sphere_samples": self.sphere_samples,
            "refine_starts": self.refine_starts,
            "refine_iters": self.refine_iters,
            "random_directions": self.random_directions,
            "stable_run": self.stable_run,
            "restarts": self.restarts,
            "validation_samples": self.validation_samples,
        }


DEFAULT_BUDGET = Budget()


# ---------------------------------------------------------------------------
# directions


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def direction_schedule(n: int, n_random: int, seed: int = 0) -> Iterator[np.ndarray]:
    """Canonical axes, then normalised e_i +- e_j (i < j), then seeded random directions.

    Rank-one covectors often sit over special directions (for the diagonal
    higher gradient only over the axes), so the structured part comes first.
    """
    eye = np.eye(n)
    for i in range(n):
        yield eye[i]
    for i in range(n):
        for j in range(i + 1, n):
            yield unit(eye[i] + eye[j])
            yield unit(eye[i] - eye[j])
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        yield unit(rng.standard_normal(n))


def hyperplane_basis(xi) -> np.ndarray:
    """Orthonormal basis (n, n-1) of the hyperplane orthogonal to ``xi``.

    Columns 2..n of the Householder reflection sending e_1 to xi/|xi|.
    """
    xi = unit(xi)
    n = xi.shape[0]
    e1 = np.zeros(n)
    e1[0] = 1.0
    d = e1 - xi
    nd = np.linalg.norm(d)
    if nd < 1e-14:
        H = np.eye(n)
    else:
        u = d / nd
        H = np.eye(n) - 2.0 * np.outer(u, u)
    return H[:, 1:]


def sphere_points(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Canonical axes (both signs) plus scrambled-Sobol points pushed to the unit sphere."""
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    if dim == 1:
        return axes
    m = max(int(np.ceil(np.log2(max(count, 2)))), 1)
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed).random_base2(m)
    g = norm.ppf(np.clip(sob, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([axes, g[:count]])


# ---------------------------------------------------------------------------
# ellipticity


@dataclass
class EllipticityVerdict:
    status: str  # "Yes" | "No" | "Inconclusive"
    constant: float
    argmin: np.ndarray
    witness_v: np.ndarray | None
    relative: float
    complex_field: bool
    tolerance: float
    samples: int

    @property
    def is_yes(self) -> bool:
        return self.status == "Yes"


def _sigma_min_point(op: Operator, x: np.ndarray, complex_field: bool) -> float:
    if complex_field:
        n = op.n
        return kernels.sigma_min_complex(op.coeff_array, op.exponents, x[:n], x[n:])
    return kernels.sigma_min_real(op.coeff_array, op.exponents, x)


def _sigma_min_batch(op: Operator, pts: np.ndarray, complex_field: bool) -> np.ndarray:
    if complex_field:
        n = op.n
        return kernels.sigma_min_batch_complex(op.coeff_array, op.exponents, pts[:, :n], pts[:, n:])
    return kernels.sigma_min_batch_real(op.coeff_array, op.exponents, pts)


def _as_direction(x: np.ndarray, n: int, complex_field: bool) -> np.ndarray:
    x = x / np.linalg.norm(x)
    return x[:n] + 1j * x[n:] if complex_field else x


def _smallest_pair(op: Operator, xi: np.ndarray) -> tuple[float, np.ndarray]:
    A = symbol_matrix(op, xi)
    _, s, vh = np.linalg.svd(A)
    N = op.dimV
    sig = s[N - 1] if A.shape[0] >= N else 0.0
    return float(sig), vh[N - 1].conj()


def _polish_zero(op: Operator, xi: np.ndarray, v: np.ndarray, complex_field: bool) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Newton on A(xi) v = 0 with |xi| = |v| = 1, started near a suspected zero."""
    n, N = op.n, op.dimV

    if complex_field:
        def unpack(z):
            return z[:n] + 1j * z[n:2 * n], z[2 * n:2 * n + N] + 1j * z[2 * n + N:]

        def resid(z):
            x, w = unpack(z)
            r = symbol_matrix(op, x) @ w
            return np.concatenate([r.real, r.imag, [np.vdot(x, x).real - 1.0, np.vdot(w, w).real - 1.0]])

        z0 = np.concatenate([xi.real, xi.imag, v.real, v.imag])
    else:
        def unpack(z):
            return z[:n], z[n:]

        def resid(z):
            x, w = unpack(z)
            return np.concatenate([symbol_matrix(op, x) @ w, [x @ x - 1.0, w @ w - 1.0]])

        z0 = np.concatenate([xi.real, v.real])
    sol = least_squares(resid, z0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    x, w = unpack(sol.x)
    return x / np.linalg.norm(x), w / np.linalg.norm(w)


def _ellipticity(op: Operator, complex_field: bool, budget: Budget, seed: int, rank_tol: float) -> EllipticityVerdict:
    n = op.n
    dim = 2 * n if complex_field else n
    scale = op.scale
    count = budget.samples_for(dim)
    if op.dimW < op.dimV:
        # symbol can never be injective
        xi = np.eye(n)[0].astype(complex if complex_field else float)
        _, v = _smallest_pair(op, xi)
        return EllipticityVerdict("No", 0.0, xi, v, 0.0, complex_field, rank_tol, 0)

    pts = sphere_points(dim, count, seed)
    vals = _sigma_min_batch(op, pts, complex_field)
    order = np.argsort(vals, kind="stable")
    starts = []
    for idx in order:
        p = pts[idx]
        if all(abs(abs(p @ q) - 1.0) > 1e-9 for q in starts):
            starts.append(p)
        if len(starts) >= budget.refine_starts:
            break

    best_x = pts[order[0]]
    best_val = float(vals[order[0]])
    if dim > 1:
        f = lambda x: _sigma_min_point(op, x / np.linalg.norm(x), complex_field)  # noqa: E731
        for x0 in starts:
            res = minimize(f, x0, method="Nelder-Mead",
                           options={"maxiter": budget.refine_iters, "xatol": 1e-12, "fatol": 1e-16})
            if res.fun < best_val:
                best_val, best_x = float(res.fun), res.x / np.linalg.norm(res.x)

    xi = _as_direction(best_x, n, complex_field)
    sig, v = _smallest_pair(op, xi)
    if sig / scale < 1e-3:
        try:
            xi2, v2 = _polish_zero(op, xi, v, complex_field)
            sig2, vv2 = _smallest_pair(op, xi2)
            if sig2 < sig:
                xi, sig, v = xi2, sig2, vv2
        except (ValueError, np.linalg.LinAlgError):  # pragma: no cover - defensive
            log.debug("zero polishing failed", exc_info=True)
    rel = sig / scale
    if rel > 10 * rank_tol:
        status, witness = "Yes", None
    elif rel < rank_tol:
        status, witness = "No", v
    else:
        status, witness = "Inconclusive", v
    return EllipticityVerdict(status, float(sig), xi, witness, float(rel), complex_field, rank_tol, len(pts))


def ellipticity_constant(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                         rank_tol: float = DEFAULT_TOL) -> EllipticityVerdict:
    """Estimate ``min_{|xi|=1} sigma_min(A^k(xi))`` over real directions.

    Coarse sphere sampling followed by Nelder-Mead refinement from the best
    starts.  Verdict thresholds are relative to the coefficient norm.
    """
    return _ellipticity(op, False, budget, seed, rank_tol)


def complex_ellipticity_constant(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                                 rank_tol: float = DEFAULT_TOL) -> EllipticityVerdict:
    """Same as :func:`ellipticity_constant` over the unit sphere of C^n."""
    return _ellipticity(op, True, budget, seed, rank_tol)


# ---------------------------------------------------------------------------
# images, canceling, essential range


def image_space(op: Operator, xi, tol: float = DEFAULT_TOL) -> Subspace:
    return subspace_span(symbol_matrix(op, xi), tol)


@dataclass
class CancelingVerdict:
    status: str  # "Yes" | "No" | "Inconclusive"
    intersection: Subspace
    directions_used: int
    elliptic_assumed: bool = True


def is_canceling(op: Operator, num_direction_samples: int = 64, seed: int = 0, stable_run: int = 50,
                 tol: float = DEFAULT_TOL, elliptic: bool | None = None) -> CancelingVerdict:
    """Intersect ``im A^k(xi)`` over the direction schedule until it is {0} or stable."""
    if elliptic is False:
        warnings.warn("canceling verdict for a non-elliptic operator", RuntimeWarning, stacklevel=2)
    sched = direction_schedule(op.n, num_direction_samples + stable_run, seed)
    inter = None
    unchanged = 0
    used = 0
    for xi in sched:
        used += 1
        img = image_space(op, xi, tol)
        new = img if inter is None else subspace_intersect(inter, img, tol)
        if new.is_zero:
            return CancelingVerdict("Yes", new, used, elliptic is not False)
        if inter is not None and new.dim == inter.dim:
            unchanged += 1
        else:
            unchanged = 0
        inter = new
        if unchanged >= stable_run:
            return CancelingVerdict("No", inter, used, elliptic is not False)
    return CancelingVerdict("Inconclusive", inter, used, elliptic is not False)


def essential_range(op: Operator, samples: int = 64, seed: int = 0, stable_run: int = 50,
                    tol: float = DEFAULT_TOL) -> Subspace:
    """Span of all symbol images over the direction schedule (stops once full or stable)."""
    span = Subspace.zero(op.dimW)
    unchanged = 0
    for xi in direction_schedule(op.n, samples + stable_run, seed):
        new = subspace_sum(span, image_space(op, xi, tol), tol)
        unchanged = unchanged + 1 if new.dim == span.dim else 0
        span = new
        if span.dim == op.dimW or unchanged >= stable_run:
            break
    return span


# ---------------------------------------------------------------------------
# spectral pairs


@dataclass
class SpectralPair:
    """(xi, coordinate) with witness w: <w, A^k(eta) v> = <xi,eta> <E, v (x) eta^{k-1}>.

    For first-order operators ``coordinate`` is e in V* (shape (N,)); otherwise
    it has shape (C(n+k-2, k-1), N) in the V (x) E_{k-1} layout.
    """

    xi: np.ndarray
    coordinate: np.ndarray
    witness: np.ndarray
    residual: float
    trivial: bool = False

    @property
    def e(self) -> np.ndarray:
        return self.coordinate

    def to_json(self) -> dict:
        return {
            "xi": self.xi.tolist(),
            "coordinate": np.asarray(self.coordinate).tolist(),
            "witness": self.witness.tolist(),
            "residual": float(self.residual),
            "trivial": bool(self.trivial),
        }


def g_matrix(op: Operator) -> np.ndarray:
    """Matrix of w -> w o cl A^k, shape (C_k * N, M); row index alpha*N + l."""
    return linearized_symbol(op).value.T


def witness_form(op: Operator, w) -> np.ndarray:
    """Coefficients P[alpha, l] of the polynomial eta -> <w, A^k(eta) e_l>."""
    return np.einsum("m,amn->an", np.asarray(w, dtype=float), op.coeff_array)


def poly_mul_matrix(n: int, k: int, xi) -> np.ndarray:
    """Coefficient map q -> (xi . eta) q(eta) from degree k-1 to degree k monomials."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros((sym_dim(n, k), sym_dim(n, k - 1)))
    for b, beta in enumerate(multiindex_enumerate(n, k - 1)):
        for j in range(n):
            alpha = list(beta)
            alpha[j] += 1
            out[multiindex_position(alpha), b] += xi[j]
    return out


def pair_residual(op: Operator, w, xi, coordinate, samples: int = 64, seed: int = 1) -> float:
    """Max relative defect of the spectral identity on random unit (eta, v)."""
    w = np.asarray(w, dtype=float)
    xi = np.asarray(xi, dtype=float)
    E = np.asarray(coordinate, dtype=float).reshape(sym_dim(op.n, op.order - 1), op.dimV)
    rng = np.random.default_rng(seed)
    etas = rng.standard_normal((samples, op.n))
    etas /= np.linalg.norm(etas, axis=1, keepdims=True)
    vs = rng.standard_normal((samples, op.dimV))
    vs /= np.linalg.norm(vs, axis=1, keepdims=True)
    lhs = np.einsum("m,smn,sn->s", w, symbol_matrix(op, etas), vs)
    mono = pure_power(etas, op.order - 1)
    rhs = (etas @ xi) * np.einsum("sb,bl,sl->s", mono, E, vs)
    denom = max(np.linalg.norm(w), 1e-300) * op.scale
    return float(np.max(np.abs(lhs - rhs)) / denom)


def extract_spectral_pair(op: Operator, w, xi, tol: float = PAIR_TOL, samples: int = 64,
                          seed: int = 1) -> SpectralPair | None:
    """Solve for the coordinate E given witness ``w`` and direction ``xi``.

    E is the least-squares quotient of the polynomial <w, A^k(eta) .> by
    <xi, eta> in monomial coefficients; the result is accepted when the
    identity holds on a fresh random sample to ``tol`` (relative).
    """
    w = np.asarray(w, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if not np.any(w) or not np.any(xi):
        return None
    P = witness_form(op, w)
    Mul = poly_mul_matrix(op.n, op.order, xi)
    E, *_ = np.linalg.lstsq(Mul, P, rcond=None)
    res = pair_residual(op, w, xi, E, samples, seed)
    if not res <= tol:
        return None
    size = np.linalg.norm(E) * np.linalg.norm(xi) / (np.linalg.norm(w) * op.scale)
    coord = E[0] if op.order == 1 else E
    return SpectralPair(xi, coord, w, res, trivial=bool(size <= tol))


def find_witness(op: Operator, xi, coordinate, tol: float = PAIR_TOL, samples: int = 64,
                 seed: int = 1) -> tuple[SpectralPair | None, float]:
    """Least-squares witness w for a proposed pair (xi, coordinate).

    Returns the validated pair (or None) and the relative fit residual.
    """
    xi = np.asarray(xi, dtype=float)
    E = np.asarray(coordinate, dtype=float).reshape(sym_dim(op.n, op.order - 1), op.dimV)
    target = poly_mul_matrix(op.n, op.order, xi) @ E
    G = g_matrix(op)
    w, *_ = np.linalg.lstsq(G, target.ravel(), rcond=None)
    tnorm = np.linalg.norm(target)
    if tnorm == 0:
        return None, float("inf")
    fit = float(np.linalg.norm(G @ w - target.ravel()) / tnorm)
    if fit > tol:
        return None, fit
    res = pair_residual(op, w, xi, E, samples, seed)
    if res > tol:
        return None, max(fit, res)
    coord = E[0] if op.order == 1 else E
    return SpectralPair(xi, coord, w, res, trivial=False), fit


def rank_A_first_order(op: Operator, w, tol: float = DEFAULT_TOL) -> int:
    """Rank of the bilinear form (eta, v) -> <w, A(eta) v> for a first-order operator."""
    if op.order != 1:
        raise UnsupportedOrderError("rank_A is defined for first-order operators only; "
                                    "use extract_spectral_pair for the rank-one predicate")
    return numeric_rank(witness_form(op, w), tol)


def essential_nullspace(op: Operator, xi, essential: Subspace | None = None, seed: int = 0,
                        tol: float = DEFAULT_TOL) -> Subspace:
    """Projection of the hyperplane null space onto the essential range.

    Covectors annihilating the whole essential range lie in every hyperplane
    null space; they carry only trivial pairs and are removed here.
    """
    WA = essential_range(op, seed=seed) if essential is None else essential
    N = hyperplane_nullspace(op, xi, seed, tol)
    if N.is_zero:
        return N
    return subspace_span(WA.projector @ N.basis, tol, ambient_dim=op.dimW, scale=1.0)


def hyperplane_nullspace(op: Operator, xi, seed: int = 0, tol: float = DEFAULT_TOL) -> Subspace:
    """Covectors annihilating A^k(eta) for every eta orthogonal to ``xi``.

    E_k of the hyperplane is spanned by pure powers of dim E_k(pi_xi) generic
    unit vectors in the hyperplane; their images under the symbol are
    collected and the orthocomplement in W returned.
    """
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ValueError("xi must be non-zero")
    n, k = op.n, op.order
    T = hyperplane_basis(xi)
    need = sym_dim(n - 1, k) if n > 1 else 0
    if need == 0:
        return Subspace.full(op.dimW)
    if k == 1:
        etas = T.T
    else:
        rng = np.random.default_rng(seed)
        for _attempt in range(5):
            z = rng.standard_normal((need, n - 1))
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            etas = z @ T.T
            if numeric_rank(pure_power(z, k), 1e-10) == need:
                break
        else:
            raise NumericalDegeneracyError("pure powers of hyperplane samples are rank deficient")
    images = symbol_matrix(op, etas)  # (need, M, N)
    cols = np.transpose(images, (1, 0, 2)).reshape(op.dimW, -1)
    return subspace_orthocomplement(subspace_span(cols, tol, ambient_dim=op.dimW))


# ---------------------------------------------------------------------------
# rank-one search and mixing


@dataclass
class RankOneSearch:
    pairs: list[SpectralPair]
    span_dim: int
    target_dim: int
    complete: bool
    directions_tried: int
    nullspace_sum: Subspace
    image_intersection: Subspace
    essential: Subspace
    restarts_used: int = 0


def _add_if_new(pairs: list[SpectralPair], span: Subspace, pair: SpectralPair, tol: float) -> Subspace:
    w = pair.witness / np.linalg.norm(pair.witness)
    if span.residual(w) > 1e-6:
        pairs.append(pair)
        return subspace_span(np.column_stack([span.basis, w]), tol, ambient_dim=span.ambient_dim, scale=1.0)
    return span


def _restart_search(op: Operator, WA: Subspace, pairs: list[SpectralPair], span: Subspace,
                    budget: Budget, seed: int, tol: float) -> tuple[Subspace, int]:
    """Minimise sigma_2/sigma_1 of B_w over unit w in W_A (first order only)."""
    Q = WA.basis
    d = Q.shape[1]
    rng = np.random.default_rng(seed + 7919)

    def ratio(z):
        w = Q @ (z / np.linalg.norm(z))
        s = np.linalg.svd(witness_form(op, w), compute_uv=False)
        return 0.0 if s.size < 2 or s[0] == 0 else s[1] / s[0]

    used = 0
    for _ in range(budget.restarts):
        if span.dim >= d:
            break
        used += 1
        z0 = rng.standard_normal(d)
        if d > 1:
            res = minimize(ratio, z0, method="Nelder-Mead",
                           options={"maxiter": 60 * d, "xatol": 1e-10, "fatol": 1e-14})
            z, val = res.x, res.fun
        else:
            z, val = z0, ratio(z0)
        if val > 1e-3:
            continue
        w = Q @ (z / np.linalg.norm(z))
        # alternate projections: rank-one approximation <-> image of g_A
        pair = None
        for _it in range(50):
            u, s, vh = np.linalg.svd(witness_form(op, w))
            xi, e = u[:, 0] * s[0], vh[0]
            pair, _fit = find_witness(op, xi, e, tol=np.inf)
            if pair is None:
                break
            w = Q @ (Q.T @ pair.witness)
            if np.linalg.norm(w) == 0:
                break
            w /= np.linalg.norm(w)
            s2 = np.linalg.svd(witness_form(op, w), compute_uv=False)
            if s2.size < 2 or s2[1] / s2[0] < 1e-13:
                break
        u, s, vh = np.linalg.svd(witness_form(op, w))
        cand = extract_spectral_pair(op, w, u[:, 0] * s[0], tol=tol)
        if cand is not None and not cand.trivial:
            span = _add_if_new(pairs, span, cand, DEFAULT_TOL)
    return span, used


def rank_one_cone_search(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                         tol: float = PAIR_TOL) -> RankOneSearch:
    """Collect validated non-trivial spectral pairs until their witnesses span (W_A)*."""
    WA = essential_range(op, budget.random_directions, seed, budget.stable_run)
    PA = WA.projector
    pairs: list[SpectralPair] = []
    span = Subspace.zero(op.dimW)
    nsum = Subspace.zero(op.dimW)
    dual = None
    tried = 0
    for xi in direction_schedule(op.n, budget.random_directions, seed):
        tried += 1
        N = hyperplane_nullspace(op, xi, seed)
        nsum = subspace_sum(nsum, N)
        img = subspace_orthocomplement(N)
        dual = img if dual is None else subspace_intersect(dual, img)
        if not N.is_zero:
            cand = subspace_span(PA @ N.basis, DEFAULT_TOL, ambient_dim=op.dimW, scale=1.0)
            for c in range(cand.dim):
                pair = extract_spectral_pair(op, cand.basis[:, c], xi, tol, budget.validation_samples)
                if pair is not None and not pair.trivial:
                    span = _add_if_new(pairs, span, pair, DEFAULT_TOL)
        if span.dim >= WA.dim:
            break
    used = 0
    if span.dim < WA.dim and op.order == 1 and budget.restarts > 0:
        span, used = _restart_search(op, WA, pairs, span, budget, seed, tol)
    if dual is None:
        dual = Subspace.full(op.dimW)
    return RankOneSearch(pairs, span.dim, WA.dim, span.dim >= WA.dim, tried, nsum, dual, WA, used)


@dataclass
class MixingVerdict:
    status: str  # "Verified" | "NotFoundWithinBudget"
    pairs: list[SpectralPair]
    span_dim: int
    essential_dim: int
    dual_intersection_dim: int
    nullspace_sum_dim: int
    de_morgan_consistent: bool
    search: RankOneSearch = field(repr=False)

    @property
    def verified(self) -> bool:
        return self.status == "Verified"


def _trivial_pairs(op: Operator, WA: Subspace) -> list[SpectralPair]:
    comp = subspace_orthocomplement(WA)
    xi = np.eye(op.n)[0]
    zero = np.zeros(op.dimV) if op.order == 1 else np.zeros((sym_dim(op.n, op.order - 1), op.dimV))
    out = []
    for c in range(comp.dim):
        w = comp.basis[:, c]
        out.append(SpectralPair(xi, zero, w, pair_residual(op, w, xi, zero), trivial=True))
    return out


def mixing_check(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> MixingVerdict:
    """Rank-one property: rank-<=1 covectors (with the rank-zero ones) spanning W*.

    Also checks the dual description: the intersection over the sampled
    hyperplanes of the spans of symbol images must have dimension
    M - dim(sum of the hyperplane null spaces).
    """
    search = rank_one_cone_search(op, budget, seed)
    consistent = search.image_intersection.dim == op.dimW - search.nullspace_sum.dim
    if search.complete:
        pairs = list(search.pairs) + _trivial_pairs(op, search.essential)
        W = np.column_stack([p.witness for p in pairs]) if pairs else np.zeros((op.dimW, 0))
        if numeric_rank(W) == op.dimW:
            return MixingVerdict("Verified", pairs, search.span_dim, search.essential.dim,
                                 search.image_intersection.dim, search.nullspace_sum.dim, consistent, search)
    return MixingVerdict("NotFoundWithinBudget", list(search.pairs), search.span_dim, search.essential.dim,
                         search.image_intersection.dim, search.nullspace_sum.dim, consistent, search)


def projection_property(op: Operator, samples: int = 20, seed: int = 0) -> tuple[bool, list[np.ndarray]]:
    """Every sampled direction carries a non-trivial spectral pair (first order)."""
    WA = essential_range(op, seed=seed)
    PA = WA.projector
    rng = np.random.default_rng(seed + 31)
    failures = []
    for _ in range(samples):
        xi = unit(rng.standard_normal(op.n))
        N = hyperplane_nullspace(op, xi, seed)
        cand = subspace_span(PA @ N.basis, DEFAULT_TOL, ambient_dim=op.dimW, scale=1.0) if not N.is_zero else N
        ok = False
        for c in range(cand.dim):
            p = extract_spectral_pair(op, cand.basis[:, c], xi)
            if p is not None and not p.trivial:
                ok = True
                break
        if not ok:
            failures.append(xi)
    return not failures, failures


# ---------------------------------------------------------------------------
# scalar first-order reduction


@dataclass
class ScalarReduction:
    R: np.ndarray
    rows: list[int]
    lower: float
    upper: float
    max_lower_violation: float
    max_upper_violation: float

    @property
    def verified(self) -> bool:
        return self.max_lower_violation <= 1e-12 and self.max_upper_violation <= 1e-12


def reduce_scalar_operator(op: Operator, samples: int = 1000, seed: int = 0,
                           tol: float = DEFAULT_TOL) -> ScalarReduction:
    """Pick n independent rows of a scalar first-order operator.

    Returns R (n x n, rank n) with |R xi| <= |A(xi)| <= c |R xi| checked on
    ``samples`` unit directions, where c = ||H R^{-1}||_2 and H stacks all rows.
    """
    if op.order != 1 or op.dimV != 1:
        raise UnsupportedOrderError("reduction needs a first-order operator on scalar functions")
    H = op.coeff_array[:, :, 0].T  # (M, n): row j is eta_j
    rows: list[int] = []
    for j in range(H.shape[0]):
        if numeric_rank(H[rows + [j]], tol) == len(rows) + 1:
            rows.append(j)
        if len(rows) == op.n:
            break
    if len(rows) < op.n:
        raise NotEllipticError(f"only {len(rows)} independent rows, need {op.n}")
    R = H[rows]
    c = float(np.linalg.norm(H @ np.linalg.inv(R), 2))
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, op.n))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    a = np.linalg.norm(xs @ H.T, axis=1)
    r = np.linalg.norm(xs @ R.T, axis=1)
    low = float(np.max(np.maximum(r - a, 0.0) / a))
    up = float(np.max(np.maximum(a - c * r, 0.0) / a))
    return ScalarReduction(R, rows, 1.0, c, low, up)


# ---------------------------------------------------------------------------
# full report


@dataclass
class ClassificationReport:
    elliptic: EllipticityVerdict
    complex_elliptic: EllipticityVerdict
    canceling: CancelingVerdict
    mixing: MixingVerdict
    essential_range_dim: int
    order: int
    seed: int
    budget: Budget

    def consistency(self) -> dict[str, bool]:
        """Implications that must hold between the verdicts."""
        mixing = self.mixing.verified
        checks = {"mixing_implies_canceling": not mixing or self.canceling.status == "Yes",
                  "de_morgan": self.mixing.de_morgan_consistent}
        if self.order == 1 and self.elliptic.is_yes:
            checks["mixing_elliptic_implies_complex"] = not mixing or self.complex_elliptic.is_yes
        return checks


def classify_operator(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                      rank_tol: float = DEFAULT_TOL) -> ClassificationReport:
    """Ellipticity (real and complex), canceling, essential range and mixing in one pass."""
    ell = ellipticity_constant(op, budget, seed, rank_tol)
    cell = complex_ellipticity_constant(op, budget, seed, rank_tol)
    canc = is_canceling(op, budget.random_directions, seed, budget.stable_run, rank_tol,
                        elliptic=None if ell.status == "Inconclusive" else ell.is_yes)
    mix = mixing_check(op, budget, seed)
    return ClassificationReport(ell, cell, canc, mix, mix.search.essential.dim, op.order, seed, budget)
