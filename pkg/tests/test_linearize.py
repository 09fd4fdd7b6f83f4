from __future__ import annotations

from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symlab.classify import (
    Budget,
    ellipticity_constant,
    essential_nullspace,
    hyperplane_nullspace,
    pair_residual,
    rank_one_cone_search,
)
from symlab.linearize import (
    check_linearization_properties,
    extend_pair,
    linearize,
    mixing_check_higher_order,
    project_pair,
    pure_power_identity_residual,
)
from symlab.operators import catalog, symbol_matrix, tensor_coords

SMALL = Budget(sphere_samples=1024, restarts=40)

HIGHER_ORDER = [
    ("Dk", {"n": 2, "k": 2}), ("Dk", {"n": 2, "k": 3}), ("Dk", {"n": 3, "k": 2}), ("Dk", {"n": 2, "N": 2, "k": 2}),
    ("scrDk", {"n": 2, "k": 2}), ("scrDk", {"n": 2, "k": 3}), ("scrDk", {"n": 3, "k": 2}), ("scrDk", {"n": 3, "k": 3}),
    ("Ek", {"n": 2, "k": 2}), ("laplacian", {"n": 2}), ("laplacian", {"n": 3}),
]


@pytest.mark.parametrize("name,params", HIGHER_ORDER)
def test_identity_on_pure_powers(name, params):
    op = catalog(name, params)
    lin = linearize(op)
    assert lin.d_op.order == 1
    assert lin.d_op.dimV == op.dimV * comb(op.n + op.order - 2, op.order - 1)
    assert lin.d_op.dimW == op.dimW + lin.curl_rows
    assert pure_power_identity_residual(lin, samples=100, seed=3) <= 1e-12


@pytest.mark.parametrize("name,params,target", [
    ("Dk", {"n": 2, "k": 2}, (3, 1)),
    ("scrDk", {"n": 2, "k": 2}, (2, 1)),
    ("laplacian", {"n": 2}, (1, 1)),
])
def test_target_dimensions(name, params, target):
    lin = linearize(catalog(name, params))
    assert (lin.parent.dimW, lin.curl_rows) == target
    assert lin.d_op.dimV == 2


def test_hessian_linearization_is_symmetrised_gradient_plus_curl():
    lin = linearize(catalog("Dk", n=2, k=2))
    rng = np.random.default_rng(1)
    for _ in range(10):
        xi, v = rng.standard_normal(2), rng.standard_normal(1)
        out = symbol_matrix(lin.d_op, xi) @ (v[0] * xi)
        np.testing.assert_allclose(out[:3], v[0] * np.array([xi[0] ** 2, xi[0] * xi[1], xi[1] ** 2]), atol=1e-12)
        assert abs(out[3]) <= 1e-12


def test_first_order_is_unchanged():
    op = catalog("symgrad", n=2)
    lin = linearize(op)
    assert lin.d_op is op and lin.curl_rows == 0


@settings(max_examples=20)
@given(st.sampled_from(HIGHER_ORDER), st.integers(0, 2**31 - 1))
def test_curl_block_vanishes_on_pure_powers(case, seed):
    op = catalog(*case)
    lin = linearize(op)
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(op.n)
    v = rng.standard_normal(op.dimV)
    out = symbol_matrix(lin.d_op, xi) @ tensor_coords(v, xi, op.order - 1)
    a, b = lin.split["curl"]
    assert np.abs(out[a:b]).max(initial=0.0) <= 1e-12 * max(1.0, np.linalg.norm(xi) ** op.order * np.linalg.norm(v))


@pytest.mark.parametrize("name,params", HIGHER_ORDER + [("deviatoric", {"n": 2}), ("div_form", {"R": [[1, 0], [0, 0]]})])
def test_ellipticity_transfers(name, params):
    op = catalog(name, params)
    lin = linearize(op)
    a = ellipticity_constant(op, SMALL).status
    b = ellipticity_constant(lin.d_op, SMALL).status
    assert a == b


def test_scrD3_spectrum_only_on_axes():
    op = catalog("scrDk", n=3, k=3)
    d = linearize(op).d_op
    for xi in (np.ones(3) / np.sqrt(3), np.random.default_rng(9).standard_normal(3)):
        assert essential_nullspace(d, xi / np.linalg.norm(xi)).is_zero
    for j in range(3):
        assert essential_nullspace(d, np.eye(3)[j]).dim == 1


def test_redundant_curl_rows_give_a_constant_left_kernel():
    # cyclic identity among the curl rows of symmetric 2-tensors in three variables
    d = linearize(catalog("scrDk", n=3, k=3)).d_op
    rng = np.random.default_rng(2)
    H = hyperplane_nullspace(d, np.ones(3) / np.sqrt(3))
    assert H.dim == 1
    for xi in rng.standard_normal((10, 3)):
        assert np.abs(H.basis.T @ symbol_matrix(d, xi)).max() <= 1e-12


def test_scrD3_planar_nullspace_matches_parent():
    # a 4 x 3 symbol always has a left kernel on the hyperplane line
    op = catalog("scrDk", n=2, k=3)
    d = linearize(op).d_op
    for xi in (np.array([1.0, 1.0]) / np.sqrt(2), np.array([1.0, 0.0])):
        assert essential_nullspace(d, xi).dim == 1 == essential_nullspace(op, xi).dim


@pytest.mark.parametrize("name,params", [("scrDk", {"n": 2, "k": 3}), ("Dk", {"n": 2, "k": 2})])
def test_pairs_extend_and_project(name, params):
    op = catalog(name, params)
    lin = linearize(op)
    pairs = [p for p in rank_one_cone_search(op, SMALL).pairs if not p.trivial]
    assert pairs
    for p in pairs:
        ext = extend_pair(lin, p)
        assert ext is not None
        np.testing.assert_allclose(ext.witness[:op.dimW], p.witness, atol=1e-8)
        assert pair_residual(lin.d_op, ext.witness, ext.xi, ext.coordinate, seed=11) <= 1e-8
        ok, back = project_pair(lin, ext)
        assert ok and back is not None
        assert pair_residual(op, back.witness, back.xi, back.coordinate, seed=12) <= 1e-8


@pytest.mark.parametrize("name,params,has_pairs", [
    ("scrDk", {"n": 2, "k": 3}, True),
    ("Dk", {"n": 2, "k": 2}, True),
    ("laplacian", {"n": 2}, False),
])
def test_linearization_report(name, params, has_pairs):
    rep = check_linearization_properties(catalog(name, params), SMALL)
    assert rep.pure_power_residual <= 1e-12
    assert rep.elliptic_agree and rep.complex_agree
    assert rep.spectrum_ok
    assert (rep.parent_pairs > 0) == has_pairs
    assert (rep.linearized_pairs > 0) == has_pairs
    js = rep.to_json()
    assert js["spectrum_ok"] is True and isinstance(js["elliptic"], list)


@pytest.mark.parametrize("name,params,status", [
    ("Dk", {"n": 2, "k": 2}, "Verified"),
    ("Dk", {"n": 3, "k": 2}, "Verified"),
    ("Dk", {"n": 2, "k": 3}, "Verified"),
    ("scrDk", {"n": 2, "k": 2}, "Verified"),
    ("scrDk", {"n": 3, "k": 3}, "Verified"),
    ("laplacian", {"n": 2}, "NotFoundWithinBudget"),
    ("laplacian", {"n": 3}, "NotFoundWithinBudget"),
])
def test_higher_order_mixing(name, params, status):
    v = mixing_check_higher_order(catalog(name, params), SMALL)
    assert v.status == status
    if status != "Verified":
        assert v.search.span_dim == 0
