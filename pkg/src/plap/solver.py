"""Two-point secant (Barzilai-Borwein) minimization of the lattice energy.

Starting from ``v0 = 0`` and a log-superposition guess ``v1``, iterate

    v[m+1] = v[m] - tau_m * grad E(v[m]),
    tau_m  = <v[m] - v[m-1], dg> / <dg, dg>,   dg = grad E(v[m]) - grad E(v[m-1]),

until ``max |grad E| < tolerance``.  There is no line search. Two guards
are added on top of the plain scheme: a fixed fallback step when the
secant denominator degenerates, and an abort when the iterate stops being
finite or the energy keeps rising.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .energy import (
    PoleMode,
    PoleSet,
    ScalarField,
    dirichlet_cells,
    dirichlet_gradient_array,
    fill_corner,
)
from .exceptions import ConfigurationError, SolverDivergedError
from .grid import GridSpec

__all__ = [
    "SolverConfig",
    "Solution",
    "initial_guess",
    "bb_step",
    "solve",
    "implied_charges",
    "GUESS_REGULARIZATION",
]

log = logging.getLogger(__name__)

GUESS_REGULARIZATION = 1e-2
# consecutive energy increases tolerated before the run is declared divergent
DIVERGENCE_PATIENCE = 500
# tau denominator below DENOMINATOR_FLOOR * scale^2 triggers the fallback step
DENOMINATOR_FLOOR = 1e-30


@dataclass(frozen=True)
class SolverConfig:
    poles: PoleSet
    tolerance: float = 1e-6
    max_iterations: int = 200_000
    fallback_step: float | None = None
    record_history: bool = False

    def __post_init__(self):
        if not isinstance(self.poles, PoleSet):
            raise ConfigurationError("poles must be a PoleSet")
        if not self.tolerance > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.fallback_step is None:
            object.__setattr__(self, "fallback_step", 1e-3 * self.grid.spacing**2)
        elif not self.fallback_step > 0:
            raise ConfigurationError("fallback_step must be positive")

    @property
    def grid(self) -> GridSpec:
        return self.poles.grid


@dataclass(frozen=True)
class Solution:
    """Result of :func:`solve`.

    ``field`` is normalized (charge mode: zero at ``anchor``) and has the
    corner (M, M) filled for output. ``iterations`` is the index m of the
    returned iterate v[m].
    """

    field: ScalarField
    iterations: int
    final_residual: float
    energy: float
    converged: bool
    tolerance: float
    anchor: tuple | None = None
    residual_history: tuple | None = None
    energy_history: tuple | None = None

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values


def _log_kernel(grid: GridSpec, positions, weights) -> np.ndarray:
    """sum_m w_m/(2 pi) * (-1/2) log(|x - x_m|^2 + 1e-2) on the nodes."""
    X, Y = grid.mesh()
    out = np.zeros_like(X)
    for (px, py), w in zip(positions, weights):
        if w == 0:
            continue
        r2 = (X - px) ** 2 + (Y - py) ** 2
        out += (w / (2 * math.pi)) * (-0.5) * np.log(r2 + GUESS_REGULARIZATION)
    return out


def initial_guess(grid: GridSpec, poles: PoleSet) -> tuple[ScalarField, ScalarField]:
    """The two starting iterates ``(v0, v1)``.

    For a +1/-1 dipole at (0, +-1) in charge mode, ``v1`` is exactly the
    regularized dipole potential
    ``-(1/4pi) log[(x^2+(y-1)^2+1e-2)/(x^2+(y+1)^2+1e-2)]``.
    In value mode the same shape, built from the centred pinned values, is
    fitted to the pins by least squares in scale and shift and the pole
    nodes are then set exactly.
    """
    if grid != poles.grid:
        raise ConfigurationError("grid does not match the pole set")
    v0 = ScalarField.zeros(grid)
    if poles.mode is PoleMode.CHARGE:
        return v0, ScalarField(_log_kernel(grid, poles.positions, poles.charges), grid)

    a = poles.values
    if len(a) == 0:
        return v0, ScalarField.zeros(grid)
    shape = _log_kernel(grid, poles.positions, a - a.mean())
    ii, jj = poles.index_arrays()
    at_poles = shape[ii, jj]
    if len(a) >= 2 and np.ptp(at_poles) > 0:
        design = np.column_stack([at_poles, np.ones_like(at_poles)])
        (scale, shift), *_ = np.linalg.lstsq(design, a, rcond=None)
    else:
        scale, shift = 0.0, float(a.mean())
    v1 = scale * shape + shift
    v1[ii, jj] = a
    return v0, ScalarField(v1, grid)


def bb_step(current, previous, grad_current, grad_previous, mask=None, fallback_step=None) -> float:
    """Secant step ``<dv, dg> / <dg, dg>`` over the entries in ``mask``.

    Falls back to ``fallback_step`` (default 1e-3 h^2 when fields carry a
    grid, else 1e-3) if ``<dg, dg>`` is below 1e-30 times the squared
    gradient scale.
    """
    arrs = []
    for a in (current, previous, grad_current, grad_previous):
        arrs.append(a.values if isinstance(a, ScalarField) else np.asarray(a, dtype=float))
    v, vp, g, gp = arrs
    if fallback_step is None:
        h = current.grid.spacing if isinstance(current, ScalarField) else 1.0
        fallback_step = 1e-3 * h * h
    if mask is not None:
        v, vp, g, gp = v[mask], vp[mask], g[mask], gp[mask]
    s = (v - vp).ravel()
    y = (g - gp).ravel()
    den = float(np.dot(y, y))
    scale = max(float(np.max(np.abs(g), initial=0.0)), float(np.max(np.abs(gp), initial=0.0)))
    if not den > DENOMINATOR_FLOOR * scale * scale or den == 0.0:
        return float(fallback_step)
    return float(np.dot(s, y)) / den


def _anchor_node(poles: PoleSet) -> tuple:
    grid = poles.grid
    origin = grid.origin_node()
    taken = set(poles.nodes)
    if origin not in taken:
        return origin
    M = grid.side_count
    for i in range(1, M + 1):
        for j in range(1, M + 1):
            if (i, j) not in taken:
                return (i, j)
    raise ConfigurationError("every node is a pole; no normalization anchor")


def solve(config: SolverConfig) -> Solution:
    """Run the secant iteration to the stopping criterion.

    Non-convergence within ``max_iterations`` is reported through
    ``Solution.converged``; a non-finite iterate or 500 consecutive energy
    increases raise :class:`SolverDivergedError`.
    """
    poles = config.poles
    grid = config.grid
    p, k = poles.p, grid.refinement
    mask = poles.free_mask()
    ii, jj = poles.index_arrays()
    charge_mode = poles.mode is PoleMode.CHARGE
    charges = poles.charges if charge_mode and len(poles) else None

    def gradient(v):
        g = dirichlet_gradient_array(v, p, k)
        if charges is not None:
            g[ii, jj] -= charges
        g[~mask] = 0.0
        return g

    def energy(v):
        terms = np.ravel(dirichlet_cells(v, p, k)).tolist()
        if charges is not None:
            terms += (-charges * v[ii, jj]).tolist()
        return math.fsum(terms)

    v0, v1 = initial_guess(grid, poles)
    v_prev = np.array(v0.values)
    v = np.array(v1.values)
    g_prev = gradient(v_prev)
    g = gradient(v)
    E = energy(v)

    residuals, energies = [], []
    m = 1
    rising = 0
    converged = False
    while True:
        r = float(np.max(np.abs(g)))
        if config.record_history:
            residuals.append(r)
            energies.append(E)
        if r < config.tolerance:
            converged = True
            break
        if m >= config.max_iterations:
            break
        tau = bb_step(v, v_prev, g, g_prev, mask=mask, fallback_step=config.fallback_step)
        v_next = v - tau * g
        m += 1
        if not np.all(np.isfinite(v_next)):
            raise SolverDivergedError(m, "non-finite iterate")
        g_next = gradient(v_next)
        E_next = energy(v_next)
        if not (math.isfinite(E_next) and np.all(np.isfinite(g_next))):
            raise SolverDivergedError(m, "non-finite energy or gradient")
        rising = rising + 1 if E_next > E else 0
        if rising >= DIVERGENCE_PATIENCE:
            raise SolverDivergedError(
                m, f"energy increased for {DIVERGENCE_PATIENCE} consecutive iterations"
            )
        v_prev, g_prev = v, g
        v, g, E = v_next, g_next, E_next

    if not converged:
        log.warning(
            "no convergence after %d iterations (residual %.3e, tolerance %.1e)",
            m, r, config.tolerance,
        )

    anchor = None
    if charge_mode:
        anchor = _anchor_node(poles)
        v = v - v[anchor[0] - 1, anchor[1] - 1]
    v = fill_corner(v)

    return Solution(
        field=ScalarField(v, grid),
        iterations=m,
        final_residual=r,
        energy=E,
        converged=converged,
        tolerance=config.tolerance,
        anchor=anchor,
        residual_history=tuple(residuals) if config.record_history else None,
        energy_history=tuple(energies) if config.record_history else None,
    )


def implied_charges(solution: Solution, poles: PoleSet, project: bool = True) -> np.ndarray:
    """Charges read off a solution as the Dirichlet gradient at the pole nodes.

    For a value-mode minimizer these are the multipliers of the pin
    constraints. ``project`` removes the mean so the result sums to zero
    and can seed a charge-mode pole set.
    """
    g = dirichlet_gradient_array(solution.values, poles.p, poles.grid.refinement)
    ii, jj = poles.index_arrays()
    c = g[ii, jj]
    if project and len(c):
        c = c - c.mean()
    return c
