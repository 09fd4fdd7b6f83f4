"""Homogeneous constant-coefficient operators and their symbols.

An operator ``A = sum_{|alpha|=k} A_alpha d^alpha`` maps V = R^N valued fields
to W = R^M valued fields.  Coefficients are stored densely as an array of
shape ``(C(n+k-1, k), M, N)`` in the multi-index enumeration order of
:mod:`symlab.tensor_core`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import InvalidDimensionError, OperatorSpecError
from .tensor_core import (
    exponent_matrix,
    monomials,
    multiindex_enumerate,
    multiindex_position,
    pure_power,
    sym_dim,
)


@dataclass(frozen=True, eq=False)
class Operator:
    n: int
    dimV: int
    dimW: int
    order: int
    coeff_array: np.ndarray = field(repr=False)
    name: str | None = None

    def __post_init__(self):
        if self.n < 1 or self.dimV < 1 or self.dimW < 1:
            raise InvalidDimensionError(f"dimensions must be >= 1, got n={self.n} N={self.dimV} M={self.dimW}")
        if self.order < 1:
            raise OperatorSpecError(f"order must be >= 1, got {self.order}")
        arr = np.array(self.coeff_array, dtype=float)
        expected = (sym_dim(self.n, self.order), self.dimW, self.dimV)
        if arr.shape != expected:
            raise OperatorSpecError(f"coefficient array has shape {arr.shape}, expected {expected}")
        if not np.any(arr):
            raise OperatorSpecError("all coefficients vanish")
        arr.setflags(write=False)
        object.__setattr__(self, "coeff_array", arr)

    @classmethod
    def from_coeffs(cls, n: int, dimV: int, dimW: int, order: int,
                    coeffs: Mapping[Sequence[int], Any], name: str | None = None) -> "Operator":
        arr = np.zeros((sym_dim(n, order), dimW, dimV))
        for alpha, mat in coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or sum(alpha) != order or min(alpha) < 0:
                raise OperatorSpecError(f"multi-index {alpha} is not of order {order} in {n} variables")
            mat = np.asarray(mat, dtype=float).reshape(dimW, dimV) if np.ndim(mat) < 2 else np.asarray(mat, float)
            if mat.shape != (dimW, dimV):
                raise OperatorSpecError(f"coefficient for {alpha} has shape {mat.shape}, expected {(dimW, dimV)}")
            arr[multiindex_position(alpha)] += mat
        return cls(n, dimV, dimW, order, arr, name)

    @property
    def coeffs(self) -> dict[tuple[int, ...], np.ndarray]:
        return {a: self.coeff_array[i] for i, a in enumerate(multiindex_enumerate(self.n, self.order))
                if np.any(self.coeff_array[i])}

    @property
    def exponents(self) -> np.ndarray:
        return exponent_matrix(self.n, self.order)

    @property
    def scale(self) -> float:
        """Frobenius norm of the coefficient array; used to normalise tolerances."""
        return float(np.linalg.norm(self.coeff_array))

    def scaled(self, t: float) -> "Operator":
        return Operator(self.n, self.dimV, self.dimW, self.order, t * self.coeff_array, self.name)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dimV": self.dimV,
            "dimW": self.dimW,
            "order": self.order,
            "name": self.name,
            "coeffs": [{"alpha": list(a), "matrix": m.tolist()} for a, m in self.coeffs.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Operator":
        try:
            n, N, M, k = int(data["n"]), int(data["dimV"]), int(data["dimW"]), int(data["order"])
            entries = data["coeffs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise OperatorSpecError(f"operator JSON is missing or has invalid field: {exc}") from exc
        coeffs: dict[tuple[int, ...], np.ndarray] = {}
        for entry in entries:
            try:
                alpha = tuple(int(a) for a in entry["alpha"])
                mat = np.asarray(entry["matrix"], dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise OperatorSpecError(f"malformed coefficient entry {entry!r}: {exc}") from exc
            if mat.ndim != 2:
                raise OperatorSpecError(f"matrix for {alpha} must be 2-D (M rows x N columns)")
            coeffs[alpha] = coeffs.get(alpha, 0) + mat
        return cls.from_coeffs(n, N, M, k, coeffs, data.get("name"))

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        return f"Operator({label}n={self.n}, N={self.dimV}, M={self.dimW}, k={self.order})"


@dataclass(frozen=True)
class SymbolMatrix:
    value: np.ndarray
    at: np.ndarray


@dataclass(frozen=True)
class LinearizedSymbolMatrix:
    """Matrix of the linearised symbol on V (x) E_k, columns ordered (alpha, l)."""

    value: np.ndarray
    n: int
    order: int
    dimV: int


def _check_xi(op: Operator, xi) -> np.ndarray:
    xi = np.asarray(xi)
    if xi.shape[-1] != op.n:
        raise InvalidDimensionError(f"direction has length {xi.shape[-1]}, operator has n={op.n}")
    if not np.iscomplexobj(xi):
        xi = xi.astype(float)
    return xi


def symbol_matrix(op: Operator, xi) -> np.ndarray:
    """Plain array version of :func:`symbol_eval`; accepts batches of shape (S, n)."""
    xi = _check_xi(op, xi)
    mono = monomials(xi, op.order)
    return np.tensordot(mono, op.coeff_array, axes=([-1], [0]))


def symbol_eval(op: Operator, xi) -> SymbolMatrix:
    xi = _check_xi(op, xi)
    return SymbolMatrix(symbol_matrix(op, xi), xi)


def linearized_symbol(op: Operator) -> LinearizedSymbolMatrix:
    C = op.coeff_array.shape[0]
    mat = np.transpose(op.coeff_array, (1, 0, 2)).reshape(op.dimW, C * op.dimV)
    return LinearizedSymbolMatrix(mat, op.n, op.order, op.dimV)


def tensor_coords(v, xi, m: int) -> np.ndarray:
    """Flat coordinates of v (x) xi^{(x) m} in V (x) E_m."""
    return np.outer(pure_power(np.asarray(xi), m), np.asarray(v)).ravel()


def sym_mul(m_coords: np.ndarray, xi, n: int | None = None) -> np.ndarray:
    """Symmetric product of a V-valued order-(k-1) tensor with a vector.

    ``m_coords`` has shape (C(n+k-2, k-1), N) or is flat with N == 1.
    Returns shape (C(n+k-1, k), N) with
    ``(M . xi)_alpha = (1/k) sum_j alpha_j xi_j M_{alpha - e_j}``.
    """
    xi = np.asarray(xi)
    n = xi.shape[0] if n is None else n
    M = np.asarray(m_coords)
    if M.ndim == 1:
        M = M[:, None]
    km1 = _order_from_length(n, M.shape[0])
    return sym_mul_matrix(n, km1 + 1, xi) @ M


def _order_from_length(n: int, length: int) -> int:
    m = 0
    while sym_dim(n, m) < length:
        m += 1
    if sym_dim(n, m) != length:
        raise InvalidDimensionError(f"{length} is not a symmetric-tensor dimension for n={n}")
    return m


def sym_mul_matrix(n: int, k: int, xi) -> np.ndarray:
    """Matrix S of shape (C(n+k-1,k), C(n+k-2,k-1)) with S @ M = M . xi."""
    xi = np.asarray(xi)
    rows = multiindex_enumerate(n, k)
    out = np.zeros((len(rows), sym_dim(n, k - 1)), dtype=np.result_type(xi, float))
    for r, alpha in enumerate(rows):
        for j in range(n):
            if alpha[j] >= 1:
                beta = list(alpha)
                beta[j] -= 1
                out[r, multiindex_position(beta)] += alpha[j] * xi[j] / k
    return out


def curl_row_labels(n: int, m: int, dimV: int) -> list[tuple[int, int, tuple[int, ...], int]]:
    if m < 1:
        raise InvalidDimensionError("curl needs tensor order m >= 1")
    return [(i, j, beta, l)
            for i, j in combinations(range(n), 2)
            for beta in multiindex_enumerate(n, m - 1)
            for l in range(dimV)]


def curl_symbol(n: int, m: int, dimV: int, xi) -> np.ndarray:
    """Symbol of the generalised curl on V (x) E_m valued fields.

    Row (i<j, beta, l) maps U to ``xi_i U^l_{beta+e_j} - xi_j U^l_{beta+e_i}``.
    """
    xi = np.asarray(xi)
    labels = curl_row_labels(n, m, dimV)
    out = np.zeros((len(labels), sym_dim(n, m) * dimV), dtype=np.result_type(xi, float))
    for r, (i, j, beta, l) in enumerate(labels):
        bj = list(beta)
        bj[j] += 1
        bi = list(beta)
        bi[i] += 1
        out[r, multiindex_position(bj) * dimV + l] += xi[i]
        out[r, multiindex_position(bi) * dimV + l] -= xi[j]
    return out


# ---------------------------------------------------------------------------
# catalog

CATALOG_NAMES = ("gradient", "Dk", "symgrad", "Ek", "scrDk", "div_form",
                 "deviatoric", "divcurl", "laplacian", "delbar")


def _need(params: Mapping[str, Any], key: str, default=None) -> Any:
    if key in params and params[key] is not None:
        return params[key]
    if default is None:
        raise OperatorSpecError(f"missing parameter {key!r}")
    return default


def _higher_gradient(n: int, N: int, k: int, name: str) -> Operator:
    C = sym_dim(n, k)
    arr = np.zeros((C, C * N, N))
    for a in range(C):
        arr[a, a * N:(a + 1) * N, :] = np.eye(N)
    return Operator(n, N, C * N, k, arr, name)


def _sym_gradient_k(n: int, k: int, name: str) -> Operator:
    """First-order operator u -> sym(Du) on E_k-valued fields, values in E_{k+1}."""
    dV, dW = sym_dim(n, k), sym_dim(n, k + 1)
    arr = np.zeros((n, dW, dV))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        arr[j] = sym_mul_matrix(n, k + 1, e)
    return Operator(n, dV, dW, 1, arr, name)


def catalog(name: str, params: Mapping[str, Any] | None = None, **kwargs) -> Operator:
    """Construct a named operator.

    Parameters by name: gradient(n, N), Dk(n, N, k), symgrad(n), Ek(n, k),
    scrDk(n, k), div_form(R), deviatoric(n), divcurl(n), laplacian(n), delbar().
    """
    p = dict(params or {})
    p.update(kwargs)
    if name == "gradient":
        n, N = int(_need(p, "n")), int(_need(p, "N", 1))
        return _higher_gradient(n, N, 1, "gradient")
    if name == "Dk":
        n, N, k = int(_need(p, "n")), int(_need(p, "N", 1)), int(_need(p, "k"))
        return _higher_gradient(n, N, k, "Dk")
    if name == "symgrad":
        return _sym_gradient_k(int(_need(p, "n")), 1, "symgrad")
    if name == "Ek":
        return _sym_gradient_k(int(_need(p, "n")), int(_need(p, "k")), "Ek")
    if name == "scrDk":
        n, k = int(_need(p, "n")), int(_need(p, "k"))
        coeffs = {}
        for i in range(n):
            alpha = [0] * n
            alpha[i] = k
            col = np.zeros((n, 1))
            col[i, 0] = 1.0
            coeffs[tuple(alpha)] = col
        return Operator.from_coeffs(n, 1, n, k, coeffs, "scrDk")
    if name == "div_form":
        R = np.atleast_2d(np.asarray(_need(p, "R"), dtype=float))
        if "n" in p and p["n"] is not None and int(p["n"]) != R.shape[1]:
            raise OperatorSpecError(f"R has {R.shape[1]} columns but n={p['n']}")
        M, n = R.shape
        arr = np.zeros((n, M, 1))
        for j in range(n):
            arr[j, :, 0] = R[:, j]
        return Operator(n, 1, M, 1, arr, "div_form")
    if name == "deviatoric":
        n = int(_need(p, "n"))
        base = _sym_gradient_k(n, 1, "deviatoric")
        arr = np.array(base.coeff_array)
        diag_rows = [multiindex_position([2 if t == i else 0 for t in range(n)]) for i in range(n)]
        for j in range(n):
            for r in diag_rows:
                arr[j, r, j] -= 1.0 / n
        return Operator(n, n, base.dimW, 1, arr, "deviatoric")
    if name == "divcurl":
        n = int(_need(p, "n"))
        pairs = list(combinations(range(n), 2))
        arr = np.zeros((n, 1 + len(pairs), n))
        for j in range(n):
            arr[j, 0, j] = 1.0
        for r, (i, j) in enumerate(pairs, start=1):
            arr[i, r, j] += 1.0
            arr[j, r, i] -= 1.0
        return Operator(n, n, 1 + len(pairs), 1, arr, "divcurl")
    if name == "laplacian":
        n = int(_need(p, "n"))
        coeffs = {tuple(2 if t == i else 0 for t in range(n)): [[1.0]] for i in range(n)}
        return Operator.from_coeffs(n, 1, 1, 2, coeffs, "laplacian")
    if name == "delbar":
        if int(p.get("n") or 2) != 2:
            raise OperatorSpecError("delbar is defined for n=2 only")
        arr = np.zeros((2, 2, 2))
        arr[0] = np.eye(2)
        arr[1] = [[0.0, -1.0], [1.0, 0.0]]
        return Operator(2, 2, 2, 1, arr, "delbar")
    raise OperatorSpecError(f"unknown catalog name {name!r}; valid names: {', '.join(CATALOG_NAMES)}")


def load_operator(path: str) -> Operator:
    with open(path, encoding="utf-8") as fh:
        return Operator.from_json(json.load(fh))
