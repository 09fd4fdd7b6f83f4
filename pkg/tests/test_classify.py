from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symlab.classify import (
    Budget,
    classify_operator,
    complex_ellipticity_constant,
    direction_schedule,
    ellipticity_constant,
    essential_nullspace,
    essential_range,
    extract_spectral_pair,
    find_witness,
    hyperplane_basis,
    hyperplane_nullspace,
    is_canceling,
    mixing_check,
    pair_residual,
    projection_property,
    rank_A_first_order,
    rank_one_cone_search,
    reduce_scalar_operator,
    sphere_points,
    witness_form,
)
from symlab.errors import NotEllipticError, UnsupportedOrderError
from symlab.operators import Operator, catalog, symbol_matrix

from .conftest import unit_rows

SMALL = Budget(sphere_samples=1024, restarts=40)


def brute_force_constant(op, count=20000, seed=0):
    """Independent estimate of min sigma_min over a dense random sample of the sphere."""
    pts = unit_rows(np.random.default_rng(seed), count, op.n)
    s = np.linalg.svd(symbol_matrix(op, pts), compute_uv=False)
    return float(s[:, op.dimV - 1].min())


def rotate_first_order(op: Operator, Q: np.ndarray) -> Operator:
    """Operator with symbol xi -> A(Q xi)."""
    arr = np.einsum("ij,imn->jmn", Q, op.coeff_array)
    return Operator(op.n, op.dimV, op.dimW, 1, arr, op.name)


# --- directions ----------------------------------------------------------------


def test_direction_schedule_starts_with_axes_then_pairs():
    dirs = list(direction_schedule(3, 5, seed=0))
    np.testing.assert_array_equal(dirs[:3], np.eye(3))
    np.testing.assert_allclose(dirs[3], np.array([1.0, 1.0, 0.0]) / np.sqrt(2))
    assert len(dirs) == 3 + 6 + 5  # e_i +- e_j up to sign
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    again = list(direction_schedule(3, 5, seed=0))
    np.testing.assert_array_equal(dirs, again)


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=4).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_hyperplane_basis_is_orthonormal_complement(xi):
    xi = np.array(xi)
    T = hyperplane_basis(xi)
    assert T.shape == (xi.size, xi.size - 1)
    np.testing.assert_allclose(T.T @ T, np.eye(xi.size - 1), atol=1e-12)
    assert np.abs(xi @ T).max() <= 1e-12 * np.linalg.norm(xi)


def test_sphere_points_include_axes():
    pts = sphere_points(3, 64, seed=1)
    for e in np.vstack([np.eye(3), -np.eye(3)]):
        assert np.any(np.all(np.isclose(pts, e), axis=1))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0)


# --- ellipticity ------------------------------------------------------------------


def test_laplacian_constant():
    v = ellipticity_constant(catalog("laplacian", n=2))
    assert v.status == "Yes"
    assert v.constant == pytest.approx(1.0, abs=1e-6)


def test_divcurl_constant():
    v = ellipticity_constant(catalog("divcurl", n=2))
    assert v.status == "Yes" and v.constant == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name,params", [("symgrad", {"n": 2}), ("symgrad", {"n": 3}), ("deviatoric", {"n": 3}),
                                          ("Dk", {"n": 2, "k": 2}), ("Ek", {"n": 2, "k": 2})])
def test_constant_matches_brute_force(name, params):
    op = catalog(name, params)
    v = ellipticity_constant(op)
    ref = brute_force_constant(op)
    # refinement can only improve on a random sample
    assert v.constant <= ref + 1e-12
    assert v.constant >= ref - 1e-2 * ref


def test_div_form_rank_deficient_is_not_elliptic():
    v = ellipticity_constant(catalog("div_form", R=[[1, 0], [0, 0]]))
    assert v.status == "No"
    np.testing.assert_allclose(np.abs(v.argmin), [0.0, 1.0], atol=1e-6)


def test_underdetermined_is_not_elliptic():
    op = Operator(2, 2, 1, 1, np.array([[[1.0, 0.0]], [[0.0, 1.0]]]))
    assert ellipticity_constant(op).status == "No"


def test_divcurl_complex_witness():
    v = complex_ellipticity_constant(catalog("divcurl", n=2))
    assert v.status == "No"
    z = v.argmin
    # z proportional to (1, i) or (1, -i): z1^2 + z2^2 = 0
    assert abs(z[0] ** 2 + z[1] ** 2) <= 1e-6
    assert abs(abs(z[0]) - abs(z[1])) <= 1e-6


@pytest.mark.parametrize("n,status", [(2, "No"), (3, "Yes")])
def test_deviatoric_complex(n, status):
    assert complex_ellipticity_constant(catalog("deviatoric", n=n)).status == status


# --- canceling and range ------------------------------------------------------------


def test_canceling_examples():
    assert is_canceling(catalog("gradient", n=2)).status == "Yes"
    lap = is_canceling(catalog("laplacian", n=2))
    assert lap.status == "No" and lap.intersection.dim == 1
    assert is_canceling(catalog("divcurl", n=2)).status == "No"


def test_canceling_warns_for_non_elliptic():
    with pytest.warns(RuntimeWarning):
        is_canceling(catalog("div_form", R=[[1, 0], [0, 0]]), elliptic=False)


@pytest.mark.parametrize("name,params,dim", [("gradient", {"n": 2}, 2), ("symgrad", {"n": 2}, 3),
                                              ("delbar", {}, 2), ("divcurl", {"n": 2}, 2),
                                              ("div_form", {"R": [[1, 0], [0, 0], [0, 0]]}, 1)])
def test_essential_range(name, params, dim):
    assert essential_range(catalog(name, params)).dim == dim


# --- rank_A and spectral pairs ---------------------------------------------------------


def test_rank_A_examples():
    E = catalog("symgrad", n=2)
    assert rank_A_first_order(E, [1.0, 0.0, 0.0]) == 1
    assert rank_A_first_order(E, [0.0, 1.0, 0.0]) == 2
    np.testing.assert_allclose(witness_form(E, [0.0, 1.0, 0.0]), [[0.0, 0.5], [0.5, 0.0]])
    L = catalog("deviatoric", n=2)
    for w in unit_rows(np.random.default_rng(0), 200, 3):
        assert rank_A_first_order(L, w) >= 2
    with pytest.raises(UnsupportedOrderError):
        rank_A_first_order(catalog("laplacian", n=2), [1.0])


def test_hyperplane_nullspace_examples():
    g = hyperplane_nullspace(catalog("gradient", n=2), [1.0, 0.0])
    assert g.dim == 1 and g.contains(np.array([1.0, 0.0]))
    s = catalog("scrDk", n=2, k=2)
    n1 = hyperplane_nullspace(s, [1.0, 0.0])
    assert n1.dim == 1 and n1.contains(np.array([1.0, 0.0]))
    # in two variables the hyperplane is a line: its single pure power hits (1, 1) only
    diag = hyperplane_nullspace(s, np.array([1.0, 1.0]) / np.sqrt(2))
    assert diag.dim == 1 and diag.contains(np.array([1.0, -1.0]) / np.sqrt(2))
    # in three variables pure powers of the plane reach every coordinate
    assert hyperplane_nullspace(catalog("scrDk", n=3, k=2), np.ones(3) / np.sqrt(3)).is_zero


def test_extract_pair_examples():
    E = catalog("symgrad", n=2)
    p = extract_spectral_pair(E, [1.0, 0.0, 0.0], [1.0, 0.0])
    assert p is not None and p.residual <= 1e-12
    np.testing.assert_allclose(p.coordinate, [1.0, 0.0], atol=1e-12)
    g = catalog("gradient", n=3, N=2)
    rng = np.random.default_rng(1)
    for _ in range(10):
        xi, e = unit_rows(rng, 1, 3)[0], rng.standard_normal(2)
        w = np.outer(xi, e).ravel()
        p = extract_spectral_pair(g, w, xi)
        assert p is not None
        np.testing.assert_allclose(p.coordinate, e, atol=1e-10)
    L = catalog("deviatoric", n=2)
    for w in unit_rows(rng, 20, 3):
        for xi in unit_rows(rng, 3, 2):
            assert extract_spectral_pair(L, w, xi) is None


def test_find_witness_for_higher_order():
    D2 = catalog("Dk", n=2, k=2)
    xi = np.array([0.6, 0.8])
    E = np.array([[0.6], [0.8]])  # E = xi, so <E, v eta> = v (xi . eta)
    p, fit = find_witness(D2, xi, E)
    assert p is not None and fit <= 1e-12
    assert pair_residual(D2, p.witness, xi, E, seed=99) <= 1e-12


def test_first_order_nullspace_covectors_factor():
    for name, params in [("gradient", {"n": 3, "N": 2}), ("symgrad", {"n": 3}), ("div_form", {"R": [[1, 2], [3, 4]]})]:
        op = catalog(name, params)
        for xi in unit_rows(np.random.default_rng(2), 5, op.n):
            N = essential_nullspace(op, xi)
            for c in range(N.dim):
                w = N.basis[:, c]
                assert rank_A_first_order(op, w) <= 1
                p = extract_spectral_pair(op, w, xi)
                assert p is not None
                B = witness_form(op, w)
                assert np.linalg.norm(B - np.outer(xi, p.coordinate)) <= 1e-8


# --- rank-one search and mixing ------------------------------------------------------------


def test_rank_one_search_examples():
    g = rank_one_cone_search(catalog("gradient", n=2, N=2))
    assert len(g.pairs) == 4 and g.span_dim == 4 and g.complete
    s = rank_one_cone_search(catalog("symgrad", n=2))
    assert s.span_dim == 3
    dirs = {tuple(np.round(np.abs(p.xi), 6)) for p in s.pairs}
    assert {(1.0, 0.0), (0.0, 1.0)} <= dirs
    d = rank_one_cone_search(catalog("deviatoric", n=2), SMALL)
    assert d.pairs == [] and d.span_dim == 0


def test_mixing_examples():
    assert mixing_check(catalog("scrDk", n=2, k=3)).verified
    lap = mixing_check(catalog("laplacian", n=2))
    assert lap.status == "NotFoundWithinBudget" and lap.span_dim == 0 and lap.dual_intersection_dim == 1
    assert lap.de_morgan_consistent
    assert mixing_check(catalog("Ek", n=2, k=1)).verified


@pytest.mark.parametrize("name,params", [("gradient", {"n": 2, "N": 2}), ("symgrad", {"n": 3}), ("scrDk", {"n": 3, "k": 2}),
                                          ("Dk", {"n": 2, "k": 3}), ("div_form", {"R": [[1, 0], [0, 0]]})])
def test_mixing_pairs_revalidate_on_fresh_samples(name, params):
    op = catalog(name, params)
    m = mixing_check(op)
    assert m.verified
    W = np.column_stack([p.witness for p in m.pairs])
    assert np.linalg.matrix_rank(W) == op.dimW
    for p in m.pairs:
        assert pair_residual(op, p.witness, p.xi, p.coordinate, samples=200, seed=2024) <= 1e-8


@pytest.mark.parametrize("name,params", [("gradient", {"n": 2}), ("symgrad", {"n": 2}), ("symgrad", {"n": 3}),
                                          ("div_form", {"R": [[1, 0], [0, 1]]})])
def test_projection_property(name, params):
    ok, failures = projection_property(catalog(name, params), samples=20)
    assert ok, failures


def test_report_consistency_checks():
    r = classify_operator(catalog("symgrad", n=2))
    assert all(r.consistency().values())
    assert r.mixing.verified and r.canceling.status == "Yes" and r.complex_elliptic.is_yes
    assert r.essential_range_dim == 3


# --- invariance ----------------------------------------------------------------------------


def _verdicts(op):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        r = classify_operator(op, SMALL)
    return r.elliptic.status, r.complex_elliptic.status, r.canceling.status, r.mixing.status, r.elliptic.constant


FIRST_ORDER = [("gradient", {"n": 2}), ("symgrad", {"n": 2}), ("divcurl", {"n": 2}), ("deviatoric", {"n": 2}),
               ("delbar", {})]


@settings(max_examples=8)
@given(st.sampled_from(FIRST_ORDER), st.floats(0.1, 10.0), st.floats(0, 2 * np.pi))
def test_verdicts_invariant_under_scaling_and_rotation(case, t, angle):
    op = catalog(*case)
    base = _verdicts(op)
    scaled = _verdicts(op.scaled(t))
    assert scaled[:4] == base[:4]
    assert scaled[4] == pytest.approx(t * base[4], rel=1e-6, abs=1e-9)
    Q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    rotated = _verdicts(rotate_first_order(op, Q))
    assert rotated[:4] == base[:4]
    assert rotated[4] == pytest.approx(base[4], rel=1e-6, abs=1e-9)


# --- scalar reduction -------------------------------------------------------------------------


def _scalar_op(rows):
    H = np.asarray(rows, dtype=float)
    return Operator(H.shape[1], 1, H.shape[0], 1, H.T[:, :, None])


def test_scalar_reduction_examples():
    r = reduce_scalar_operator(catalog("gradient", n=2))
    np.testing.assert_array_equal(r.R, np.eye(2))
    assert r.upper == pytest.approx(1.0) and r.verified
    r = reduce_scalar_operator(_scalar_op([[1, 0], [0, 1], [1, 1]]))
    assert r.rows == [0, 1] and r.upper == pytest.approx(np.sqrt(3)) and r.upper <= np.sqrt(6)
    assert r.verified
    with pytest.raises(NotEllipticError):
        reduce_scalar_operator(_scalar_op([[1, 0], [2, 0]]))
    with pytest.raises(UnsupportedOrderError):
        reduce_scalar_operator(catalog("symgrad", n=2))
