import math

import numpy as np
import pytest

from conftest import fig1_poles
from plap import (
    GridSpec,
    PoleSet,
    ScalarField,
    SolverConfig,
    SolverDivergedError,
    bb_step,
    energy_gradient,
    implied_charges,
    initial_guess,
    solve,
)
from plap import solver as solver_mod
from plap.exceptions import ConfigurationError

GUESS_AT_POLE = 0.476984294928996  # -(1/4pi) log(1e-2 / (4 + 1e-2))


def charge_dipole(k=4, ell=4, p=4.0):
    return PoleSet.with_charges(GridSpec(ell, k), [(0, 1), (0, -1)], [1, -1], p)


def block_minima(history, block=100):
    return [min(history[i:i + block]) for i in range(0, len(history), block)]


def test_initial_guess_values():
    poles = charge_dipole()
    v0, v1 = initial_guess(poles.grid, poles)
    assert not np.any(v0.values)
    assert v1.at(*poles.grid.origin_node()) == pytest.approx(0, abs=1e-15)
    assert v1.at(*poles.nodes[0]) == pytest.approx(GUESS_AT_POLE, rel=1e-12)
    assert v1.at(*poles.nodes[1]) == pytest.approx(-GUESS_AT_POLE, rel=1e-12)


def test_value_mode_guess_hits_pins():
    poles = fig1_poles()
    _, v1 = initial_guess(poles.grid, poles)
    assert [v1.at(*n) for n in poles.nodes] == [1.0, -1.0]


def test_bb_step_quadratic():
    rng = np.random.default_rng(0)
    s = 3.7
    v, vp = rng.standard_normal(20), rng.standard_normal(20)
    assert bb_step(v, vp, s * v, s * vp) == pytest.approx(1 / s, rel=1e-13)


def test_bb_step_fallback_on_identical_gradients():
    g = np.ones(10)
    assert bb_step(np.arange(10.0), np.zeros(10), g, g, fallback_step=0.125) == 0.125
    grid = GridSpec(2, 4)
    f = ScalarField.zeros(grid)
    assert bb_step(f, f, f, f) == pytest.approx(1e-3 * grid.spacing**2)


def test_bb_step_respects_mask():
    v = np.array([1.0, 2.0, 100.0])
    g = np.array([2.0, 4.0, -7.0])
    mask = np.array([True, True, False])
    assert bb_step(v, np.zeros(3), g, np.zeros(3), mask=mask) == pytest.approx(0.5)


def test_fig1_second_step_positive():
    poles = fig1_poles()
    mask = poles.free_mask()
    v0, v1 = initial_guess(poles.grid, poles)
    grad = lambda a: energy_gradient(ScalarField(a, poles.grid), poles).values
    vs = [v0.values, v1.values]
    gs = [grad(vs[0]), grad(vs[1])]
    taus = []
    for _ in range(2):
        tau = bb_step(vs[-1], vs[-2], gs[-1], gs[-2], mask=mask)
        taus.append(tau)
        vs.append(vs[-1] - tau * gs[-1])
        gs.append(grad(vs[-1]))
    # v0 = 0 violates the pins, so only steps between feasible iterates are convexity pairs
    assert math.isfinite(taus[1]) and taus[1] > 0


def test_single_pinned_pole_is_constant():
    poles = PoleSet.with_values(GridSpec(4, 4), [(0, 1)], [3.0], 4)
    sol = solve(SolverConfig(poles))
    assert sol.converged and sol.iterations <= 2
    assert np.all(sol.values == 3.0)
    assert sol.energy == 0


def test_p_two_rejected():
    with pytest.raises(ConfigurationError):
        charge_dipole(p=2.0)


def test_config_validation():
    poles = fig1_poles()
    for kwargs in ({"tolerance": 0}, {"max_iterations": 0}, {"fallback_step": -1.0}):
        with pytest.raises(ConfigurationError):
            SolverConfig(poles, **kwargs)
    assert SolverConfig(poles).fallback_step == pytest.approx(1e-3 / 16)


def test_fig1_converges(fig1):
    sol, poles = fig1
    assert sol.converged and sol.final_residual < 1e-6
    assert [sol.field.at(*n) for n in poles.nodes] == [1.0, -1.0]
    M = poles.grid.M
    assert sol.values[-1, -1] == 0.5 * (sol.values[-2, -1] + sol.values[-1, -2])
    assert sol.values.shape == (M, M)
    assert len(sol.residual_history) == sol.iterations


def test_energy_block_minima_nonincreasing(fig1):
    sol, _ = fig1
    mins = block_minima(sol.energy_history)
    assert all(b <= a + 1e-10 * (1 + abs(a)) for a, b in zip(mins, mins[1:]))
    assert sol.energy_history[-1] <= sol.energy_history[0]


def test_charge_mode_normalized_and_stationary():
    poles = charge_dipole()
    sol = solve(SolverConfig(poles))
    assert sol.converged
    assert sol.anchor == poles.grid.origin_node()
    assert sol.field.at(*sol.anchor) == 0
    g = energy_gradient(sol.field, poles).values
    rng = np.random.default_rng(7)
    mask = poles.free_mask()
    ii, jj = poles.index_arrays()
    mask[ii, jj] = False
    for _ in range(5):
        phi = np.where(mask, rng.standard_normal(g.shape), 0.0)
        assert abs(np.sum(g * phi)) <= sol.tolerance * np.sum(np.abs(phi))


def test_anchor_moves_off_origin_pole():
    poles = PoleSet.with_charges(GridSpec(2, 2), [(0, 0), (1, 0)], [1, -1], 3)
    sol = solve(SolverConfig(poles))
    assert sol.anchor == (1, 1)
    assert sol.field.at(1, 1) == 0


def test_non_convergence_is_reported():
    sol = solve(SolverConfig(fig1_poles(), max_iterations=5))
    assert not sol.converged
    assert sol.iterations == 5
    assert sol.final_residual >= 1e-6


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises(monkeypatch):
    monkeypatch.setattr(solver_mod, "bb_step", lambda *a, **k: 1e308)
    with pytest.raises(SolverDivergedError) as info:
        solve(SolverConfig(charge_dipole(k=2, ell=2)))
    assert info.value.iteration == 2


def test_residual_history_deterministic():
    a = solve(SolverConfig(charge_dipole(k=2), record_history=True))
    b = solve(SolverConfig(charge_dipole(k=2), record_history=True))
    assert a.residual_history == b.residual_history
    assert a.energy_history == b.energy_history
    assert np.array_equal(a.values, b.values)


def test_implied_charges_sum_to_zero(fig1):
    sol, poles = fig1
    c = implied_charges(sol, poles)
    assert abs(c.sum()) < 1e-15
    assert c[0] > 0 > c[1]
    raw = implied_charges(sol, poles, project=False)
    assert raw == pytest.approx(c, abs=poles.grid.M**2 * sol.tolerance)


def _duality_error(tol):
    poles = fig1_poles()
    pinned = solve(SolverConfig(poles, tolerance=tol, max_iterations=10**6))
    charged = PoleSet.with_charges(poles.grid, poles.positions, implied_charges(pinned, poles), 4)
    free = solve(SolverConfig(charged, tolerance=tol, max_iterations=10**6))
    d = (pinned.values - free.values)[poles.free_mask()]
    return 0.5 * float(np.ptp(d))


def test_mode_duality_tight_tolerance():
    assert _duality_error(1e-8) <= 1e-5


@pytest.mark.slow
@pytest.mark.xfail(reason="duality error is about 100-400 times the stopping tolerance, not 10", strict=True)
def test_mode_duality_ten_times_tolerance():
    assert _duality_error(1e-7) <= 1e-6
