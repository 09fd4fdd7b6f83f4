from __future__ import annotations

import json
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from symlab.errors import InvalidDimensionError, OperatorSpecError
from symlab.operators import (
    CATALOG_NAMES,
    Operator,
    catalog,
    curl_symbol,
    linearized_symbol,
    load_operator,
    sym_mul,
    sym_mul_matrix,
    symbol_eval,
    symbol_matrix,
    tensor_coords,
)
from symlab.tensor_core import multiindex_enumerate, nullspace, pure_power, sym_dim

from .conftest import unit_rows

CASES = [
    ("gradient", {"n": 2, "N": 1}), ("gradient", {"n": 3, "N": 2}),
    ("Dk", {"n": 2, "k": 2}), ("Dk", {"n": 3, "k": 3}), ("Dk", {"n": 2, "N": 2, "k": 2}),
    ("symgrad", {"n": 2}), ("symgrad", {"n": 3}),
    ("Ek", {"n": 2, "k": 2}), ("Ek", {"n": 3, "k": 2}),
    ("scrDk", {"n": 2, "k": 2}), ("scrDk", {"n": 3, "k": 3}),
    ("div_form", {"R": [[1, 2], [0, 1], [3, 0]]}),
    ("deviatoric", {"n": 2}), ("deviatoric", {"n": 3}),
    ("divcurl", {"n": 2}), ("divcurl", {"n": 3}),
    ("laplacian", {"n": 2}), ("laplacian", {"n": 3}),
    ("delbar", {}),
]


# --- independent oracle: apply the operator, written out by hand, to a plane wave -----


def _sym_entry(T, beta):
    """Entry of a symmetric tensor given by its entry coordinates (dict by multi-index)."""
    return T[tuple(beta)]


def _apply_by_hand(name, params, u, x):
    """The operator written directly in terms of partial derivatives of sympy expressions."""
    n = len(x)
    if name == "gradient":
        return [sp.diff(u[l], x[j]) for j in range(n) for l in range(len(u))]
    if name == "Dk":
        out = []
        for a in multiindex_enumerate(n, params["k"]):
            for l in range(len(u)):
                out.append(sp.diff(u[l], *[x[j] for j in range(n) for _ in range(a[j])]))
        return out
    if name in ("symgrad", "deviatoric"):
        grad = [[sp.diff(u[i], x[j]) for j in range(n)] for i in range(n)]
        div = sum(grad[i][i] for i in range(n))
        out = []
        for a in multiindex_enumerate(n, 2):
            i, j = [t for t in range(n) for _ in range(a[t])]
            val = (grad[i][j] + grad[j][i]) / 2
            if name == "deviatoric" and i == j:
                val -= div / n
            out.append(val)
        return out
    if name == "Ek":
        k = params["k"]
        T = {b: u[p] for p, b in enumerate(multiindex_enumerate(n, k))}
        out = []
        for a in multiindex_enumerate(n, k + 1):
            idx = [t for t in range(n) for _ in range(a[t])]
            # full symmetrisation of the gradient over the k+1 slots
            terms = []
            for s in range(k + 1):
                rest = idx[:s] + idx[s + 1:]
                beta = [rest.count(t) for t in range(n)]
                terms.append(sp.diff(_sym_entry(T, beta), x[idx[s]]))
            out.append(sum(terms) / (k + 1))
        return out
    if name == "scrDk":
        return [sp.diff(u[0], x[i], params["k"]) for i in range(n)]
    if name == "div_form":
        R = sp.Matrix(params["R"])
        return list(R * sp.Matrix([sp.diff(u[0], xj) for xj in x]))
    if name == "divcurl":
        out = [sum(sp.diff(u[i], x[i]) for i in range(n))]
        for i in range(n):
            for j in range(i + 1, n):
                out.append(sp.diff(u[j], x[i]) - sp.diff(u[i], x[j]))
        return out
    if name == "laplacian":
        return [sum(sp.diff(u[0], xi, 2) for xi in x)]
    if name == "delbar":
        return [sp.diff(u[0], x[0]) - sp.diff(u[1], x[1]), sp.diff(u[1], x[0]) + sp.diff(u[0], x[1])]
    raise KeyError(name)


def _oracle_symbol(name, params, op, xi, v):
    """A^k(xi) v read off A applied to v (xi.x)^k / k! (k-th derivatives of a degree-k polynomial)."""
    x = sp.symbols(f"x1:{op.n + 1}")
    xi_s = [sp.Rational(int(c)) for c in xi]
    phase = sum(a * b for a, b in zip(xi_s, x)) ** op.order / factorial(op.order)
    u = [sp.Rational(int(c)) * phase for c in v]
    vals = _apply_by_hand(name, params, u, x)
    return np.array([float(sp.simplify(e)) for e in vals])


@pytest.mark.parametrize("name,params", CASES, ids=[f"{a}-{json.dumps(b)}" for a, b in CASES])
def test_catalog_symbol_matches_hand_written_operator(name, params):
    op = catalog(name, params)
    rng = np.random.default_rng(7)
    for _ in range(3):
        xi = rng.integers(-3, 4, op.n)
        v = rng.integers(-3, 4, op.dimV)
        expect = _oracle_symbol(name, params, op, xi, v)
        np.testing.assert_allclose(symbol_matrix(op, xi.astype(float)) @ v, expect, atol=1e-12)


def test_symbol_examples():
    grad = catalog("gradient", n=2)
    np.testing.assert_array_equal(symbol_eval(grad, [3.0, 4.0]).value, [[3.0], [4.0]])
    assert symbol_matrix(catalog("laplacian", n=2), [1.0, 2.0])[0, 0] == 5.0
    E = catalog("symgrad", n=2)
    np.testing.assert_allclose(symbol_matrix(E, [1.0, 0.0]) @ [0.0, 1.0], [0.0, 0.5, 0.0])
    np.testing.assert_array_equal(symbol_matrix(grad, [0.0, 0.0]), np.zeros((2, 1)))
    with pytest.raises(InvalidDimensionError):
        symbol_matrix(grad, [1.0, 0.0, 0.0])


def test_catalog_examples():
    g = catalog("gradient", {"n": 2, "N": 1})
    assert (g.order, g.dimW) == (1, 2)
    np.testing.assert_array_equal(g.coeffs[(1, 0)], [[1.0], [0.0]])
    np.testing.assert_array_equal(g.coeffs[(0, 1)], [[0.0], [1.0]])
    s = catalog("scrDk", {"n": 2, "k": 2})
    assert set(s.coeffs) == {(2, 0), (0, 2)}
    np.testing.assert_array_equal(s.coeffs[(2, 0)], [[1.0], [0.0]])
    np.testing.assert_array_equal(s.coeffs[(0, 2)], [[0.0], [1.0]])
    dev = catalog("deviatoric", {"n": 2})
    rng = np.random.default_rng(0)
    for _ in range(5):
        a, xi = rng.standard_normal(2), rng.standard_normal(2)
        sym = (np.outer(a, xi) + np.outer(xi, a)) / 2 - (a @ xi) / 2 * np.eye(2)
        np.testing.assert_allclose(symbol_matrix(dev, xi) @ a, [sym[0, 0], sym[0, 1], sym[1, 1]], atol=1e-14)


def test_catalog_errors():
    with pytest.raises(OperatorSpecError, match="valid names"):
        catalog("curl")
    with pytest.raises(OperatorSpecError):
        catalog("delbar", n=3)
    with pytest.raises(OperatorSpecError):
        catalog("div_form", R=[[1, 0]], n=3)
    with pytest.raises(OperatorSpecError):
        catalog("gradient")


def test_operator_validation():
    with pytest.raises(OperatorSpecError):
        Operator(2, 1, 1, 1, np.zeros((2, 1, 1)))
    with pytest.raises(OperatorSpecError):
        Operator(2, 1, 1, 1, np.ones((3, 1, 1)))
    with pytest.raises(InvalidDimensionError):
        Operator(0, 1, 1, 1, np.ones((1, 1, 1)))
    with pytest.raises(OperatorSpecError):
        Operator.from_coeffs(2, 1, 1, 2, {(1, 0): [[1.0]]})


def test_json_round_trip(tmp_path):
    op = catalog("Ek", n=2, k=2)
    path = tmp_path / "op.json"
    path.write_text(json.dumps(op.to_json()))
    back = load_operator(str(path))
    np.testing.assert_array_equal(back.coeff_array, op.coeff_array)
    assert (back.n, back.dimV, back.dimW, back.order) == (op.n, op.dimV, op.dimW, op.order)
    with pytest.raises(OperatorSpecError):
        Operator.from_json({"n": 2, "dimV": 1, "dimW": 1, "order": 1, "coeffs": [{"alpha": [1, 0]}]})
    with pytest.raises(OperatorSpecError):
        Operator.from_json({"n": 2})


def test_linearized_symbol_examples():
    np.testing.assert_array_equal(linearized_symbol(catalog("laplacian", n=2)).value, [[1.0, 0.0, 1.0]])
    np.testing.assert_array_equal(linearized_symbol(catalog("scrDk", n=2, k=2)).value,
                                  [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    g = catalog("gradient", n=2, N=2)
    cl = linearized_symbol(g).value
    for j in range(2):
        for l in range(2):
            np.testing.assert_array_equal(cl[:, j * 2 + l], g.coeff_array[j][:, l])


# --- properties ----------------------------------------------------------------


@pytest.mark.parametrize("name,params", CASES, ids=[f"{a}-{json.dumps(b)}" for a, b in CASES])
def test_homogeneity_and_linearization_identity(name, params):
    op = catalog(name, params)
    rng = np.random.default_rng(3)
    cl = linearized_symbol(op).value
    xs = rng.standard_normal((100, op.n))
    vs = rng.standard_normal((100, op.dimV))
    for xi, v in zip(xs, vs):
        t = rng.uniform(-3, 3)
        A = symbol_matrix(op, xi)
        assert np.abs(symbol_matrix(op, t * xi) - t ** op.order * A).max() <= 1e-12 * max(1, abs(t)) ** op.order * 10
        lhs = cl @ tensor_coords(v, xi, op.order)
        scale = np.linalg.norm(xi) ** op.order * np.linalg.norm(v) * op.scale
        assert np.abs(lhs - A @ v).max() <= 1e-12 * scale


@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 2), st.data())
def test_sym_mul_composes_pure_powers_exactly(n, k, N, data):
    ints = st.lists(st.integers(-4, 4), min_size=n, max_size=n)
    xi = [Fraction(c) for c in data.draw(ints)]
    v = [Fraction(c) for c in data.draw(st.lists(st.integers(-4, 4), min_size=N, max_size=N))]
    xi_arr = np.array(xi, dtype=object)

    def power(m):
        return np.array([[np.prod([xi[j] ** a[j] for j in range(n)], initial=Fraction(1)) * vl for vl in v]
                         for a in multiindex_enumerate(n, m)], dtype=object)

    S = sym_mul_matrix(n, k, xi_arr)
    assert (S.dot(power(k - 1)) == power(k)).all()


def test_sym_mul_by_hand():
    v = np.array([2.0, 3.0])  # order-1 tensor (n=2), scalar V
    out = sym_mul(v, np.array([1.0, 0.0]))
    # alpha=(2,0): 1/2*2*1*v1 ; (1,1): 1/2*(1*1*v2 + 1*0*v1) ; (0,2): 0
    np.testing.assert_allclose(out[:, 0], [2.0, 1.5, 0.0])
    np.testing.assert_array_equal(sym_mul(v, np.zeros(2)), np.zeros((3, 1)))


def test_curl_examples():
    c = curl_symbol(2, 1, 1, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(c, [[0.0, 1.0]])
    K = nullspace(curl_symbol(2, 2, 1, np.array([1.0, 1.0])))
    assert K.dim == 1 and K.contains(np.ones(3) / np.sqrt(3))
    assert nullspace(curl_symbol(3, 2, 2, np.zeros(3))).dim == sym_dim(3, 2) * 2
    with pytest.raises(InvalidDimensionError):
        curl_symbol(2, 0, 1, np.ones(2))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("N", [1, 2])
def test_curl_kernel_is_pure_powers(n, m, N):
    rng = np.random.default_rng(n * 100 + m * 10 + N)
    for xi in unit_rows(rng, 20, n):
        K = nullspace(curl_symbol(n, m, N, xi))
        assert K.dim == N
        for l in range(N):
            assert K.contains(tensor_coords(np.eye(N)[l], xi, m))


def test_tensor_coords_layout():
    v = np.array([1.0, 2.0])
    xi = np.array([3.0, 5.0])
    c = tensor_coords(v, xi, 2).reshape(3, 2)
    np.testing.assert_array_equal(c, np.outer(pure_power(xi, 2), v))


def test_all_names_constructible():
    params = {"n": 2, "N": 1, "k": 2, "R": [[1, 0], [0, 1]]}
    for name in CATALOG_NAMES:
        op = catalog(name, {k: v for k, v in params.items() if not (name == "delbar" and k != "n")})
        assert op.scale > 0
