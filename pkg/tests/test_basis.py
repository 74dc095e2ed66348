"""Domain construction, eigenpairs, and grid inner products."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halflap import (
    AliasingError,
    DomainError,
    DomainMismatchError,
    GridFn,
    boundary_distance,
    eigenpairs,
    inner_product,
    make_interval,
    make_rectangle,
)

ORTHO_TOL = 1e-13

lengths = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)
counts = st.integers(min_value=8, max_value=96)


def test_interval_has_interior_nodes_only():
    dom = make_interval(1.0, 8)
    assert dom.num_nodes == 7
    assert dom.spacings == (0.125,)
    x = dom.axis_nodes(0)
    assert x[0] == 0.125 and x[-1] == 0.875


def test_interval_pi_length():
    dom = make_interval(math.pi, 16)
    assert dom.num_nodes == 15
    assert dom.spacings[0] == pytest.approx(math.pi / 16, rel=1e-15)


def test_negative_length_rejected():
    with pytest.raises(DomainError):
        make_interval(-1.0, 8)


def test_rectangle_node_counts():
    assert make_rectangle(1.0, 1.0, 8, 8).num_nodes == 49
    assert make_rectangle(2.0, 1.0, 16, 8).num_nodes == 105


def test_rectangle_zero_side_rejected():
    with pytest.raises(DomainError):
        make_rectangle(1.0, 0.0, 8, 8)


def test_too_coarse_grid_rejected():
    with pytest.raises(DomainError):
        make_interval(1.0, 4)


def test_interval_eigenvalues_are_squared_multiples():
    basis = eigenpairs(make_interval(1.0, 64), 3)
    want = np.array([1.0, 4.0, 9.0]) * math.pi**2
    np.testing.assert_allclose(basis.lambdas, want, rtol=1e-15)


def test_square_ground_eigenvalue():
    basis = eigenpairs(make_rectangle(1.0, 1.0, 16, 16), 1)
    assert basis.lambdas[0] == pytest.approx(2.0 * math.pi**2, rel=1e-15)
    assert basis.mode_indices[0] == (1, 1)


def test_discrete_orthonormality():
    basis = eigenpairs(make_interval(1.0, 256), 32)
    gram = (basis.matrix * basis.domain.weight) @ basis.matrix.T
    assert np.max(np.abs(gram - np.eye(32))) <= ORTHO_TOL


def test_mode_count_bounds():
    dom = make_interval(1.0, 16)
    with pytest.raises(DomainError):
        eigenpairs(dom, 0)
    with pytest.raises(AliasingError):
        eigenpairs(dom, 16)
    eigenpairs(dom, 15)


@given(L=lengths, N=counts, K=st.integers(min_value=1, max_value=7))
@settings(max_examples=25, deadline=None)
def test_eigenvalues_positive_and_sorted(L, N, K):
    basis = eigenpairs(make_interval(L, N), K)
    assert basis.lambdas[0] > 0
    assert np.all(np.diff(basis.lambdas) >= 0)


@given(L1=lengths, L2=lengths, K=st.integers(min_value=1, max_value=12))
@settings(max_examples=25, deadline=None)
def test_rectangle_eigenvalues_positive_and_sorted(L1, L2, K):
    basis = eigenpairs(make_rectangle(L1, L2, 64, 64), K)
    assert basis.lambdas[0] > 0
    assert np.all(np.diff(basis.lambdas) >= 0)


@given(L=lengths, K=st.integers(min_value=1, max_value=7))
@settings(max_examples=25, deadline=None)
def test_eigenvalues_grid_independent(L, K):
    a = eigenpairs(make_interval(L, 32), K).lambdas
    b = eigenpairs(make_interval(L, 128), K).lambdas
    np.testing.assert_array_equal(a, b)


def test_boundary_distance_interval():
    dom = make_interval(1.0, 10)
    d = boundary_distance(dom).values
    x = dom.axis_nodes(0)
    assert d[np.argmin(np.abs(x - 0.3))] == pytest.approx(0.3, rel=1e-15)
    dom8 = make_interval(1.0, 8)
    d8 = boundary_distance(dom8).values
    assert d8[5] == pytest.approx(0.25, rel=1e-15)  # node at 0.75


def test_boundary_distance_rectangle():
    dom = make_rectangle(1.0, 1.0, 8, 8)
    d = boundary_distance(dom).reshaped()
    assert d[3, 0] == pytest.approx(0.125, rel=1e-15)  # node (0.5, 0.125)


@given(L=lengths, N=counts)
@settings(max_examples=25, deadline=None)
def test_boundary_distance_nonnegative_and_symmetric(L, N):
    dom = make_interval(L, N)
    d = boundary_distance(dom).values
    assert np.all(d >= 0)
    assert np.min(d) <= L / N + 1e-12  # vanishes toward the boundary
    np.testing.assert_allclose(d, d[::-1], rtol=0, atol=1e-14 * L)


def test_inner_product_of_modes():
    dom = make_interval(1.0, 256)
    basis = eigenpairs(dom, 2)
    phi1, phi2 = basis.modes
    assert inner_product(phi1, phi1) == pytest.approx(1.0, abs=1e-13)
    assert inner_product(phi1, phi2) == pytest.approx(0.0, abs=1e-13)


def test_inner_product_with_zero():
    dom = make_interval(1.0, 32)
    z = GridFn(dom, np.zeros(dom.num_nodes))
    w = GridFn(dom, np.ones(dom.num_nodes))
    assert inner_product(z, w) == 0.0


def test_inner_product_domain_mismatch():
    a = GridFn(make_interval(1.0, 32), np.ones(31))
    b = GridFn(make_interval(2.0, 32), np.ones(31))
    with pytest.raises(DomainMismatchError):
        inner_product(a, b)


def test_grid_fn_validates_shape_and_finiteness():
    dom = make_interval(1.0, 32)
    with pytest.raises(ValueError):
        GridFn(dom, np.ones(30))
    with pytest.raises(ValueError):
        GridFn(dom, np.full(31, np.nan))


def test_grid_fn_accepts_shaped_values():
    dom = make_rectangle(1.0, 2.0, 8, 16)
    u = GridFn(dom, np.ones(dom.shape))
    assert u.values.shape == (dom.num_nodes,)
    assert u.reshaped().shape == dom.shape
