"""Pure-Python/NumPy implementations of the hot kernels.

These are the reference versions; the compiled module ``_core`` must agree
with them to rounding.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

_MAX_DIGITS = 80


def _symbols(coeffs: np.ndarray, exps: np.ndarray, xis: np.ndarray) -> np.ndarray:
    mono = np.prod(xis[:, None, :] ** exps[None, :, :], axis=-1)
    return np.einsum("sc,cmn->smn", mono, coeffs)


def _smallest(mats: np.ndarray, ncols: int) -> np.ndarray:
    if mats.shape[1] < ncols:
        return np.zeros(mats.shape[0])
    s = np.linalg.svd(mats, compute_uv=False)
    return s[:, ncols - 1]


def sigma_min_batch_real(coeffs: np.ndarray, exps: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """N-th singular value of the symbol at each real direction (0 when M < N)."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    return _smallest(_symbols(coeffs, exps, xis), coeffs.shape[2])


def sigma_min_batch_complex(coeffs: np.ndarray, exps: np.ndarray, xr: np.ndarray, xi: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(xr, dtype=float)) + 1j * np.atleast_2d(np.asarray(xi, dtype=float))
    return _smallest(_symbols(coeffs.astype(complex), exps, z), coeffs.shape[2])


def sigma_min_real(coeffs, exps, xi) -> float:
    return float(sigma_min_batch_real(coeffs, exps, np.asarray(xi, dtype=float)[None, :])[0])


def sigma_min_complex(coeffs, exps, xr, xi) -> float:
    return float(
        sigma_min_batch_complex(coeffs, exps, np.asarray(xr, float)[None, :], np.asarray(xi, float)[None, :])[0]
    )


def cantor_rational(num: int, den: int, max_digits: int = _MAX_DIGITS) -> float:
    """Cantor function at num/den in [0, 1] by exact ternary digit extraction."""
    if num <= 0:
        return 0.0
    if num >= den:
        return 1.0
    result = 0.0
    scale = 0.5
    r = num
    for _ in range(max_digits):
        r *= 3
        d, r = divmod(r, den)
        if d == 1:
            return result + scale
        if d == 2:
            result += scale
        if r == 0:
            break
        scale *= 0.5
    return result


def cantor_scalar(x) -> float:
    """Cantor function of a float or :class:`fractions.Fraction`, exact to rounding."""
    if isinstance(x, Fraction):
        return cantor_rational(x.numerator, x.denominator)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("Cantor function of a non-finite value")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    num, den = x.as_integer_ratio()
    return cantor_rational(num, den)


def cantor_function(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        out[i] = cantor_scalar(v)
    return out.reshape(x.shape)
