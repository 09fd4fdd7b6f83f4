"""Multi-indices, symmetric-tensor coordinates and numerical subspace arithmetic.

Symmetric tensors of order ``m`` on R^n are stored by their entries indexed by
multi-indices of order ``m`` in the order produced by
:func:`multiindex_enumerate`.  With this convention the pure power
``xi (x) ... (x) xi`` has coordinates ``(xi**alpha)_alpha``.  V-valued symmetric
tensors are stored as arrays of shape ``(len(multiindices), dimV)`` and
flattened row-major, so the flat index of ``(alpha, l)`` is
``alpha_index * dimV + l``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidDimensionError

DEFAULT_TOL = 1e-9


def _compositions(n: int, k: int) -> Iterable[tuple[int, ...]]:
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(n - 1, k - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate_cached(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(_compositions(n, k))


def multiindex_enumerate(n: int, k: int) -> list[tuple[int, ...]]:
    """All multi-indices of length ``n`` and order ``k``, largest first entry first.

    >>> multiindex_enumerate(2, 2)
    [(2, 0), (1, 1), (0, 2)]
    """
    if n < 1:
        raise InvalidDimensionError(f"need n >= 1, got {n}")
    if k < 0:
        raise InvalidDimensionError(f"need k >= 0, got {k}")
    return list(_enumerate_cached(n, k))


def sym_dim(n: int, m: int) -> int:
    """Dimension C(n+m-1, m) of the symmetric m-tensors on R^n."""
    if m < 0:
        return 0
    return comb(n + m - 1, m)


@lru_cache(maxsize=None)
def _index_map(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {alpha: i for i, alpha in enumerate(_enumerate_cached(n, k))}


def multiindex_position(alpha: Sequence[int]) -> int:
    alpha = tuple(int(a) for a in alpha)
    return _index_map(len(alpha), sum(alpha))[alpha]


@lru_cache(maxsize=None)
def exponent_matrix(n: int, k: int) -> np.ndarray:
    """Integer array of shape (C(n+k-1,k), n) listing the enumerated multi-indices."""
    out = np.array(_enumerate_cached(n, k), dtype=np.int64).reshape(-1, n)
    out.setflags(write=False)
    return out


def monomials(xi: np.ndarray, k: int) -> np.ndarray:
    """Monomials ``xi**alpha`` over the order-k enumeration.

    ``xi`` may be a single vector (n,) or a batch (S, n); real or complex.
    """
    xi = np.asarray(xi)
    n = xi.shape[-1]
    exps = exponent_matrix(n, k)
    if k == 0:
        return np.ones(xi.shape[:-1] + (1,), dtype=np.result_type(xi, float))
    powers = xi[..., None, :] ** exps
    return np.prod(powers, axis=-1)


def pure_power(xi: np.ndarray, m: int) -> np.ndarray:
    """Coordinates of the symmetric tensor xi^{(x) m}."""
    return monomials(np.asarray(xi), m)


def multinomial_weights(n: int, m: int) -> np.ndarray:
    """Number of index tuples represented by each entry, m!/alpha!."""
    return np.array(
        [factorial(m) // int(np.prod([factorial(a) for a in alpha])) for alpha in _enumerate_cached(n, m)],
        dtype=float,
    )


@dataclass(frozen=True)
class SymCoords:
    """A (possibly V-valued) symmetric tensor of order ``m`` on R^n."""

    n: int
    m: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape[0] != sym_dim(self.n, self.m):
            raise InvalidDimensionError(
                f"expected {sym_dim(self.n, self.m)} coordinates, got {self.coeffs.shape[0]}"
            )


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """Span of orthonormal columns of ``basis`` (shape ``(ambient_dim, dim)``)."""

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            b = b.reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, v: np.ndarray) -> float:
        """Norm of the component of ``v`` orthogonal to the subspace."""
        v = np.asarray(v)
        return float(np.linalg.norm(v - self.basis @ (self.basis.conj().T @ v)))

    def contains(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        v = np.asarray(v)
        scale = max(np.linalg.norm(v), 1.0)
        return self.residual(v) <= tol * scale

    @classmethod
    def zero(cls, ambient_dim: int, dtype=float) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=dtype))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _as_columns(vectors, ambient_dim: int | None) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return vectors
    vecs = [np.asarray(v).ravel() for v in vectors]
    if not vecs:
        if ambient_dim is None:
            raise InvalidDimensionError("cannot infer ambient dimension of an empty list")
        return np.zeros((ambient_dim, 0))
    dims = {v.shape[0] for v in vecs}
    if len(dims) != 1:
        raise InvalidDimensionError(f"vectors have mixed dimensions {sorted(dims)}")
    return np.stack(vecs, axis=1)


def subspace_span(vectors, tol: float = DEFAULT_TOL, ambient_dim: int | None = None,
                  scale: float | None = None) -> Subspace:
    """Orthonormal basis of the numerical span of ``vectors``.

    ``vectors`` is a list of equal-length vectors or a 2-D array whose columns
    are the vectors.  Singular values below ``tol * max(sigma_max, scale)`` are
    dropped; pass ``scale`` when the input is a projection of unit vectors, so
    that vectors projected to rounding noise are not mistaken for directions.
    """
    cols = _as_columns(vectors, ambient_dim)
    d = cols.shape[0]
    if cols.shape[1] == 0 or not np.any(cols):
        return Subspace.zero(d, dtype=cols.dtype if np.iscomplexobj(cols) else float)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    ref = s[0] if scale is None else max(s[0], scale)
    keep = s > tol * ref
    return Subspace(d, u[:, keep], tol)


def subspace_intersect(a: Subspace, b: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Numerical intersection from principal angles.

    Directions whose principal-angle cosine is at least ``1 - tol`` are kept.
    """
    if a.ambient_dim != b.ambient_dim:
        raise InvalidDimensionError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")
    if a.is_zero or b.is_zero:
        return Subspace.zero(a.ambient_dim)
    m = a.basis.conj().T @ b.basis
    u, s, _ = np.linalg.svd(m)
    keep = s >= 1.0 - tol
    return subspace_span(a.basis @ u[:, : len(s)][:, keep], tol, ambient_dim=a.ambient_dim)


def subspace_sum(a: Subspace, b: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise InvalidDimensionError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")
    return subspace_span(np.hstack([a.basis, b.basis]), tol, ambient_dim=a.ambient_dim)


def subspace_orthocomplement(s: Subspace) -> Subspace:
    d = s.ambient_dim
    if s.is_zero:
        return Subspace.full(d)
    if s.dim >= d:
        return Subspace.zero(d)
    q, _ = np.linalg.qr(s.basis, mode="complete")
    comp = q[:, s.dim:]
    # one re-orthogonalisation pass against the input basis
    comp = comp - s.basis @ (s.basis.conj().T @ comp)
    comp, _ = np.linalg.qr(comp)
    return Subspace(d, comp, s.tol)


def numeric_rank(matrix, tol: float = DEFAULT_TOL) -> int:
    a = np.atleast_2d(np.asarray(matrix))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def nullspace(matrix, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the numerical kernel (right null space)."""
    a = np.atleast_2d(np.asarray(matrix))
    ncols = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return Subspace.full(ncols) if not np.iscomplexobj(a) else Subspace(ncols, np.eye(ncols, dtype=complex))
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(ncols, vh[rank:].conj().T, tol)
