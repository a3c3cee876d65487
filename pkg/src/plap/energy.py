"""Discrete p-Dirichlet energy on the lattice and its gradient.

The energy of a nodal field ``v`` is

    E(v) = (1/p) k^(p-2) sum_{a,b=1}^{M-1} ((v[a+1,b]-v[a,b])^2 + (v[a,b+1]-v[a,b])^2)^(p/2)

with forward differences over the (M-1)^2 lower-left cells.  The corner
node (M, M) enters no difference and is not an optimization variable.

Poles couple to the field in one of two ways:

* charge mode adds the linear term ``-sum_i c_i v[x_i]`` (charges sum to 0);
* value mode pins ``v[x_i] = a_i`` and leaves the energy unchanged, the
  constraint being enforced by projecting the gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError, EvaluationError
from .grid import GridSpec, locate_node

__all__ = [
    "PoleMode",
    "PoleSet",
    "ScalarField",
    "discrete_dirichlet",
    "total_energy",
    "energy_gradient",
    "dirichlet_gradient_array",
    "dirichlet_cells",
    "finite_difference_gradient",
    "fill_corner",
    "ZERO_SUM_RTOL",
]

# relative tolerance on sum(c_i) for charge-mode pole sets
ZERO_SUM_RTOL = 1e-12


class PoleMode(str, Enum):
    CHARGE = "charge"
    VALUE = "value"


@dataclass(frozen=True)
class ScalarField:
    """Nodal values ``values[i-1, j-1]`` on ``grid``."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        M = self.grid.side_count
        if arr.shape != (M, M):
            raise ConfigurationError(f"field shape {arr.shape} does not match grid side {M}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def at(self, i: int, j: int) -> float:
        """Value at the 1-based node ``(i, j)``."""
        return float(self.values[i - 1, j - 1])

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        M = grid.side_count
        return cls(np.zeros((M, M)), grid)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "ScalarField":
        M = grid.side_count
        return cls(np.full((M, M), float(value)), grid)


@dataclass(frozen=True)
class PoleSet:
    """Pole positions on ``grid`` with charges or pinned values.

    Use :meth:`with_charges` or :meth:`with_values` rather than the raw
    constructor. ``weights`` holds the charges in charge mode and the
    pinned values in value mode; ``nodes`` are the 1-based lattice nodes.
    """

    grid: GridSpec
    positions: tuple
    weights: tuple
    mode: PoleMode
    p: float
    nodes: tuple = field(init=False)

    def __post_init__(self):
        mode = PoleMode(self.mode)
        object.__setattr__(self, "mode", mode)
        positions = tuple((float(x), float(y)) for x, y in self.positions)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "weights", weights)
        if len(positions) != len(weights):
            raise ConfigurationError(
                f"{len(positions)} pole positions but {len(weights)} weights"
            )
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if not p > 2:
            raise ConfigurationError(f"exponent p must exceed n = 2, got p = {p:g}")
        if not all(math.isfinite(w) for w in weights):
            raise ConfigurationError("pole weights must be finite")

        nodes = tuple(locate_node(self.grid, pos) for pos in positions)
        if len(set(nodes)) != len(nodes):
            raise ConfigurationError("pole positions must map to distinct nodes")
        corner = (self.grid.side_count, self.grid.side_count)
        if corner in nodes:
            raise ConfigurationError(
                "the corner node (M, M) is not an optimization variable and cannot hold a pole"
            )
        object.__setattr__(self, "nodes", nodes)

        if mode is PoleMode.CHARGE:
            total = math.fsum(weights)
            scale = max(1.0, math.fsum(abs(w) for w in weights))
            if abs(total) > ZERO_SUM_RTOL * scale:
                raise ConfigurationError(
                    f"charges must sum to zero, got sum(c) = {total:.17g}"
                )

    @classmethod
    def with_charges(cls, grid: GridSpec, positions: Sequence, charges: Sequence, p: float):
        return cls(grid, tuple(positions), tuple(charges), PoleMode.CHARGE, p)

    @classmethod
    def with_values(cls, grid: GridSpec, positions: Sequence, values: Sequence, p: float):
        return cls(grid, tuple(positions), tuple(values), PoleMode.VALUE, p)

    def __len__(self):
        return len(self.positions)

    @property
    def charges(self) -> np.ndarray:
        if self.mode is not PoleMode.CHARGE:
            raise ConfigurationError("pole set is in value mode; it has no charges")
        return np.array(self.weights)

    @property
    def values(self) -> np.ndarray:
        if self.mode is not PoleMode.VALUE:
            raise ConfigurationError("pole set is in charge mode; it has no pinned values")
        return np.array(self.weights)

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based ``(ii, jj)`` suitable for fancy indexing."""
        if not self.nodes:
            empty = np.zeros(0, dtype=int)
            return empty, empty
        ij = np.array(self.nodes, dtype=int) - 1
        return ij[:, 0], ij[:, 1]

    def free_mask(self) -> np.ndarray:
        """Boolean mask of the optimization variables.

        Excludes the corner (M, M) always and the pole nodes in value mode.
        """
        M = self.grid.side_count
        mask = np.ones((M, M), dtype=bool)
        mask[-1, -1] = False
        if self.mode is PoleMode.VALUE:
            ii, jj = self.index_arrays()
            mask[ii, jj] = False
        return mask

    def max_radius(self) -> float:
        if not self.positions:
            return 0.0
        return max(math.hypot(x, y) for x, y in self.positions)


def _check_p(p):
    if not p > 2:
        raise ConfigurationError(f"exponent p must exceed n = 2, got p = {p:g}")


def _values_of(field_or_array):
    if isinstance(field_or_array, ScalarField):
        return field_or_array.values
    return np.asarray(field_or_array, dtype=float)


def dirichlet_cells(v: np.ndarray, p: float, k: int) -> np.ndarray:
    """Per-cell energy densities, shape (M-1, M-1), row-major in (a, b)."""
    dx = v[1:, :-1] - v[:-1, :-1]
    dy = v[:-1, 1:] - v[:-1, :-1]
    return (float(k) ** (p - 2) / p) * (dx * dx + dy * dy) ** (p / 2)


def dirichlet_gradient_array(v: np.ndarray, p: float, k: int) -> np.ndarray:
    """Analytic gradient of the Dirichlet part; entry (M, M) is 0."""
    dx = v[1:, :-1] - v[:-1, :-1]
    dy = v[:-1, 1:] - v[:-1, :-1]
    w = float(k) ** (p - 2) * (dx * dx + dy * dy) ** ((p - 2) / 2)
    fx = w * dx
    fy = w * dy
    g = np.zeros_like(v)
    g[1:, :-1] += fx
    g[:-1, :-1] -= fx
    g[:-1, :-1] -= fy
    g[:-1, 1:] += fy
    return g


def _fsum(arr) -> float:
    return math.fsum(np.ravel(arr).tolist())


def discrete_dirichlet(field: ScalarField | np.ndarray, p: float, k: int | None = None) -> float:
    """Dirichlet part of the energy, summed with exact-rounding accumulation."""
    _check_p(p)
    v = _values_of(field)
    if k is None:
        if not isinstance(field, ScalarField):
            raise ConfigurationError("refinement k is required for a bare array")
        k = field.grid.refinement
    if not np.all(np.isfinite(v)):
        raise EvaluationError("field contains non-finite values")
    return _fsum(dirichlet_cells(v, p, k))


def _check_pairing(field: ScalarField, poles: PoleSet):
    if not isinstance(field, ScalarField):
        raise ConfigurationError("expected a ScalarField")
    if field.grid != poles.grid:
        raise ConfigurationError(
            f"field grid {field.grid} does not match pole grid {poles.grid}"
        )


def total_energy(field: ScalarField, poles: PoleSet) -> float:
    """Energy including the pole coupling.

    In value mode the pin constraint is handled by the caller and only the
    Dirichlet part is returned.
    """
    _check_pairing(field, poles)
    v = field.values
    if not np.all(np.isfinite(v)):
        raise EvaluationError("field contains non-finite values")
    cells = dirichlet_cells(v, poles.p, poles.grid.refinement)
    if poles.mode is PoleMode.VALUE or not len(poles):
        return _fsum(cells)
    ii, jj = poles.index_arrays()
    linear = -poles.charges * v[ii, jj]
    return math.fsum(np.ravel(cells).tolist() + linear.tolist())


def energy_gradient(field: ScalarField, poles: PoleSet) -> ScalarField:
    """Partial derivatives of :func:`total_energy` w.r.t. every node.

    Value mode returns the projected gradient (zero at pinned nodes).
    """
    _check_pairing(field, poles)
    v = field.values
    if not np.all(np.isfinite(v)):
        raise EvaluationError("field contains non-finite values")
    g = dirichlet_gradient_array(v, poles.p, poles.grid.refinement)
    ii, jj = poles.index_arrays()
    if poles.mode is PoleMode.CHARGE:
        g[ii, jj] -= poles.charges
    else:
        g[ii, jj] = 0.0
    g[-1, -1] = 0.0
    return ScalarField(g, field.grid)


def finite_difference_gradient(
    func: Callable[[np.ndarray], float],
    values: np.ndarray,
    step: float = 1e-6,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """Central-difference gradient of ``func`` at ``values``.

    Entries outside ``mask`` are left at 0. Intended as an independent check
    of :func:`energy_gradient`, so it only ever calls ``func``.
    """
    x0 = np.array(values, dtype=float)
    grad = np.zeros_like(x0)
    if mask is None:
        mask = np.ones(x0.shape, dtype=bool)
    x = x0.copy()
    for idx in zip(*np.nonzero(mask)):
        x[idx] = x0[idx] + step
        fplus = func(x)
        x[idx] = x0[idx] - step
        fminus = func(x)
        x[idx] = x0[idx]
        grad[idx] = (fplus - fminus) / (2 * step)
    return grad


def fill_corner(v: np.ndarray) -> np.ndarray:
    """Copy of ``v`` with v[M, M] set to the mean of its two lattice neighbours."""
    out = np.array(v, dtype=float)
    out[-1, -1] = 0.5 * (out[-2, -1] + out[-1, -2])
    return out
