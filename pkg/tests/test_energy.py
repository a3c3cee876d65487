import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_dirichlet, brute_total
from plap import (
    GridSpec,
    PoleSet,
    ScalarField,
    discrete_dirichlet,
    energy_gradient,
    finite_difference_gradient,
    total_energy,
)
from plap.energy import dirichlet_gradient_array, fill_corner
from plap.exceptions import ConfigurationError, EvaluationError

SINGLE_CELL = np.array([[0.0, 0.0], [1.0, 0.0]])  # v11=0, v21=1, v12=0, v22=0


def fig1_charges(k=2, ell=2):
    return PoleSet.with_charges(GridSpec(ell, k), [(0, 1), (0, -1)], [1, -1], 4)


def test_single_cell_hand_value():
    assert discrete_dirichlet(SINGLE_CELL, 4, 1) == 0.25
    assert brute_dirichlet(SINGLE_CELL.tolist(), 4, 1) == 0.25


def test_single_cell_with_charges():
    nodes, charges = [(2, 1), (1, 1)], [1.0, -1.0]
    assert brute_total(SINGLE_CELL.tolist(), 4, 1, nodes, charges) == -0.75
    dirichlet = discrete_dirichlet(SINGLE_CELL, 4, 1)
    linear = sum(c * SINGLE_CELL[i - 1, j - 1] for (i, j), c in zip(nodes, charges))
    assert dirichlet - linear == -0.75


def test_corner_does_not_enter():
    v = SINGLE_CELL.copy()
    v[1, 1] = 123.0
    assert discrete_dirichlet(v, 4, 1) == 0.25


@pytest.mark.parametrize("p", [2.5, 3, 4, 5])
def test_matches_brute_force(p):
    rng = np.random.default_rng(1)
    v = rng.standard_normal((9, 9))
    assert discrete_dirichlet(v, p, 2) == pytest.approx(brute_dirichlet(v.tolist(), p, 2), rel=1e-13)


def test_constant_field_zero_energy():
    poles = fig1_charges()
    field = ScalarField.constant(poles.grid, 2.5)
    assert discrete_dirichlet(field, 3.3) == 0
    assert total_energy(field, poles) == 0
    assert total_energy(ScalarField.zeros(poles.grid), poles) == 0
    empty = PoleSet.with_charges(poles.grid, [], [], 4)
    assert not np.any(energy_gradient(field, empty).values)
    g = energy_gradient(field, poles).values
    ii, jj = poles.index_arrays()
    assert list(g[ii, jj]) == [-1, 1]


def test_p_homogeneity_factor_16():
    rng = np.random.default_rng(2)
    v = rng.standard_normal((9, 9))
    assert discrete_dirichlet(2 * v, 4, 2) == pytest.approx(16 * discrete_dirichlet(v, 4, 2), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (5, 5), elements=st.floats(-3, 3)),
    st.floats(2.1, 6),
    st.floats(0.1, 4),
)
def test_p_homogeneity_property(v, p, t):
    lhs = discrete_dirichlet(t * v, p, 2)
    rhs = t**p * discrete_dirichlet(v, p, 2)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("p", [3, 4, 5])
@pytest.mark.parametrize("mode", ["charge", "value"])
def test_gradient_matches_finite_differences(p, mode):
    rng = np.random.default_rng(int(p) + (mode == "value"))
    grid = GridSpec(2, 2)
    if mode == "charge":
        poles = PoleSet.with_charges(grid, [(0, 1), (0, -1)], [1, -1], p)
    else:
        poles = PoleSet.with_values(grid, [(0, 1), (0, -1)], [1, -1], p)
    v = rng.standard_normal((grid.M, grid.M))
    g = energy_gradient(ScalarField(v, grid), poles).values
    fd = finite_difference_gradient(
        lambda a: total_energy(ScalarField(a, grid), poles), v, mask=poles.free_mask()
    )
    assert np.max(np.abs(g - fd)) <= 1e-6 * (1 + np.max(np.abs(g)))
    assert g[-1, -1] == 0


def test_value_mode_gradient_is_projected():
    grid = GridSpec(2, 2)
    poles = PoleSet.with_values(grid, [(0, 1), (0, -1)], [1, -1], 4)
    v = np.random.default_rng(5).standard_normal((grid.M, grid.M))
    g = energy_gradient(ScalarField(v, grid), poles).values
    raw = dirichlet_gradient_array(v, 4, 2)
    ii, jj = poles.index_arrays()
    assert np.all(g[ii, jj] == 0)
    assert np.any(raw[ii, jj] != 0)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (9, 9), elements=st.floats(-5, 5)), st.floats(-10, 10))
def test_translation_invariance_and_zero_sum(v, shift):
    poles = fig1_charges()
    f = ScalarField(v, poles.grid)
    E = total_energy(f, poles)
    assert total_energy(ScalarField(v + shift, poles.grid), poles) == pytest.approx(E, rel=1e-9, abs=1e-9)
    g = energy_gradient(f, poles).values
    assert abs(np.sum(g)) <= 1e-9 * (1 + np.sum(np.abs(g)))


@settings(max_examples=30, deadline=None)
@given(
    arrays(np.float64, (9, 9), elements=st.floats(-3, 3)),
    arrays(np.float64, (9, 9), elements=st.floats(-3, 3)),
    st.floats(0.01, 0.99),
)
def test_convexity(v, w, lam):
    poles = fig1_charges()
    E = lambda a: total_energy(ScalarField(a, poles.grid), poles)
    lhs = E(lam * v + (1 - lam) * w)
    rhs = lam * E(v) + (1 - lam) * E(w)
    assert lhs <= rhs + 1e-12 * (1 + abs(rhs))


def test_energy_is_order_deterministic():
    v = np.random.default_rng(3).standard_normal((33, 33))
    assert discrete_dirichlet(v, 4, 4) == discrete_dirichlet(v.copy(), 4, 4)


def test_non_finite_field_rejected():
    v = np.zeros((9, 9))
    v[3, 3] = np.nan
    with pytest.raises(EvaluationError):
        discrete_dirichlet(v, 4, 2)
    with pytest.raises(EvaluationError):
        total_energy(ScalarField(v, GridSpec(2, 2)), fig1_charges())


@pytest.mark.parametrize("p", [2, 1.5])
def test_p_at_most_two_rejected(p):
    with pytest.raises(ConfigurationError):
        fig1_charges().__class__.with_charges(GridSpec(2, 2), [(0, 1), (0, -1)], [1, -1], p)
    with pytest.raises(ConfigurationError):
        discrete_dirichlet(np.zeros((9, 9)), p, 2)


def test_pole_set_validation():
    g = GridSpec(2, 2)
    with pytest.raises(ConfigurationError, match="sum to zero"):
        PoleSet.with_charges(g, [(0, 1), (0, -1)], [1, -0.5], 4)
    with pytest.raises(ConfigurationError, match="distinct"):
        PoleSet.with_charges(g, [(0, 1), (0, 1)], [1, -1], 4)
    with pytest.raises(ConfigurationError, match="corner"):
        PoleSet.with_values(g, [(2, 2)], [1], 4)
    with pytest.raises(ConfigurationError, match="finite"):
        PoleSet.with_values(g, [(0, 1)], [float("inf")], 4)
    with pytest.raises(ConfigurationError):
        PoleSet.with_values(g, [(0, 1)], [1, 2], 4)


def test_zero_sum_tolerance_is_relative():
    g = GridSpec(2, 2)
    big = 1e6
    PoleSet.with_charges(g, [(0, 1), (0, -1)], [big, -big + 1e-7], 4)
    with pytest.raises(ConfigurationError):
        PoleSet.with_charges(g, [(0, 1), (0, -1)], [big, -big + 1e-3], 4)


def test_mode_accessors():
    cp = fig1_charges()
    vp = PoleSet.with_values(GridSpec(2, 2), [(0, 1)], [3], 4)
    assert list(cp.charges) == [1, -1]
    assert list(vp.values) == [3]
    with pytest.raises(ConfigurationError):
        cp.values
    with pytest.raises(ConfigurationError):
        vp.charges
    assert cp.free_mask().sum() == 80
    assert vp.free_mask().sum() == 79


def test_field_is_read_only_and_shape_checked():
    g = GridSpec(2, 2)
    f = ScalarField.zeros(g)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1
    with pytest.raises(ConfigurationError):
        ScalarField(np.zeros((3, 3)), g)
    assert ScalarField.constant(g, 2).at(1, 1) == 2


def test_grid_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        total_energy(ScalarField.zeros(GridSpec(2, 4)), fig1_charges())


def test_fill_corner():
    v = np.arange(9.0).reshape(3, 3)
    out = fill_corner(v)
    assert out[2, 2] == 0.5 * (v[1, 2] + v[2, 1])
    assert v[2, 2] == 8
