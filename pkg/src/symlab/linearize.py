"""First-order linearization of a k-th order operator.

For U with values in V (x) E_{k-1}, the linearized operator maps U to the
pair (cl A^k applied to the symmetrised gradient of U, curl U).  On
U = grad^{k-1} u it reproduces (A u, 0), and it inherits ellipticity and
the rank-one spectrum of A.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import (
    DEFAULT_BUDGET,
    Budget,
    MixingVerdict,
    SpectralPair,
    complex_ellipticity_constant,
    ellipticity_constant,
    extract_spectral_pair,
    hyperplane_nullspace,
    mixing_check,
    rank_one_cone_search,
)
from .operators import Operator, curl_row_labels, curl_symbol, linearized_symbol, symbol_matrix, sym_mul_matrix, tensor_coords
from .tensor_core import sym_dim

PAIR_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    parent: Operator
    d_op: Operator
    split: dict = field(default_factory=dict)  # {"W": (start, stop), "curl": (start, stop)}

    @property
    def curl_rows(self) -> int:
        a, b = self.split["curl"]
        return b - a


def linearize(op: Operator) -> LinearizedOperator:
    M = op.dimW
    if op.order == 1:
        return LinearizedOperator(op, op, {"W": (0, M), "curl": (M, M)})
    n, N, k = op.n, op.dimV, op.order
    m = k - 1
    cl = linearized_symbol(op).value  # (M, C_k * N)
    R = len(curl_row_labels(n, m, N))
    D = sym_dim(n, m) * N
    coeffs = np.zeros((n, M + R, D))
    eye = np.eye(n)
    for j in range(n):
        S = np.kron(sym_mul_matrix(n, k, eye[j]), np.eye(N))  # V(x)E_m -> V(x)E_k, flat alpha*N + l
        coeffs[j, :M] = cl @ S
        coeffs[j, M:] = curl_symbol(n, m, N, eye[j])
    name = f"d({op.name})" if op.name else "d"
    d_op = Operator(n, D, M + R, 1, coeffs, name)
    return LinearizedOperator(op, d_op, {"W": (0, M), "curl": (M, M + R)})


def pure_power_identity_residual(lin: LinearizedOperator, samples: int = 100, seed: int = 0) -> float:
    """max |dA(xi)[v (x) xi^{k-1}] - (A^k(xi) v, 0)| / scale over random unit (xi, v)."""
    op = lin.parent
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        xi = rng.standard_normal(op.n)
        xi /= np.linalg.norm(xi)
        v = rng.standard_normal(op.dimV)
        v /= np.linalg.norm(v)
        lhs = symbol_matrix(lin.d_op, xi) @ tensor_coords(v, xi, op.order - 1)
        rhs = np.concatenate([symbol_matrix(op, xi) @ v, np.zeros(lin.curl_rows)])
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst / op.scale


def extend_pair(lin: LinearizedOperator, pair: SpectralPair, seed: int = 0,
                tol: float = PAIR_TOL) -> SpectralPair | None:
    """Extend a pair of the parent to the linearization: witness (w, h) with the same W-block."""
    if lin.parent.order == 1:
        return pair
    M = lin.parent.dimW
    N_ = hyperplane_nullspace(lin.d_op, pair.xi, seed)
    if N_.is_zero:
        return None
    Q = N_.basis
    c, *_ = np.linalg.lstsq(Q[:M], pair.witness, rcond=None)
    w = Q @ c
    if np.linalg.norm(w[:M] - pair.witness) > 1e-8 * max(np.linalg.norm(pair.witness), 1e-300):
        return None
    ext = extract_spectral_pair(lin.d_op, w, pair.xi, tol=tol)
    if ext is None:
        return None
    E = np.asarray(pair.coordinate, dtype=float).ravel()
    if np.linalg.norm(ext.coordinate - E) > 1e-6 * max(np.linalg.norm(E), 1.0):
        return None
    return ext


def project_pair(lin: LinearizedOperator, pair: SpectralPair, tol: float = PAIR_TOL) -> tuple[bool, SpectralPair | None]:
    """Restrict a linearization pair to the W-block; (contained, parent pair or None if the block is 0)."""
    M = lin.parent.dimW
    w = pair.witness[:M]
    if np.linalg.norm(w) <= 1e-12 * np.linalg.norm(pair.witness):
        return True, None
    p = extract_spectral_pair(lin.parent, w, pair.xi, tol=tol)
    return p is not None, p


@dataclass
class LinearizationReport:
    pure_power_residual: float
    elliptic: tuple[str, str]
    complex_elliptic: tuple[str, str]
    elliptic_agree: bool
    complex_agree: bool
    parent_pairs: int
    extended: int
    linearized_pairs: int
    projected: int

    @property
    def spectrum_ok(self) -> bool:
        return self.extended == self.parent_pairs and self.projected == self.linearized_pairs

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["elliptic"] = list(self.elliptic)
        out["complex_elliptic"] = list(self.complex_elliptic)
        out["spectrum_ok"] = self.spectrum_ok
        return out


def check_linearization_properties(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                                   samples: int = 100) -> LinearizationReport:
    lin = linearize(op)
    res = pure_power_identity_residual(lin, samples, seed)
    e1 = ellipticity_constant(op, budget, seed).status
    e2 = ellipticity_constant(lin.d_op, budget, seed).status
    c1 = complex_ellipticity_constant(op, budget, seed).status
    c2 = complex_ellipticity_constant(lin.d_op, budget, seed).status
    parent_pairs = [p for p in rank_one_cone_search(op, budget, seed).pairs if not p.trivial]
    extended = sum(extend_pair(lin, p, seed) is not None for p in parent_pairs)
    lin_pairs = [p for p in rank_one_cone_search(lin.d_op, budget, seed).pairs if not p.trivial]
    projected = sum(project_pair(lin, p)[0] for p in lin_pairs)
    return LinearizationReport(res, (e1, e2), (c1, c2), e1 == e2, c1 == c2,
                               len(parent_pairs), int(extended), len(lin_pairs), int(projected))


def mixing_check_higher_order(op: Operator, budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> MixingVerdict:
    """Rank-one property of order k: witnesses (xi_i, E_i) whose covectors span W*.

    The order-k hyperplane null space (pure-power span of E_k of the
    hyperplane) is built into :func:`symlab.classify.hyperplane_nullspace`,
    so this is the generic search applied directly to ``op``.
    """
    return mixing_check(op, budget, seed)
