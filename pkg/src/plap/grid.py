"""Uniform square lattice over [-l, l]^2.

Node indices are 1-based, i along x and j along y, so ``values[i-1, j-1]``
holds the nodal value at ``node_coords(grid, i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import ConfigurationError, OffLatticeError

__all__ = ["GridSpec", "node_coords", "locate_node"]


@dataclass(frozen=True)
class GridSpec:
    """Lattice with ``k`` nodes per unit length on ``[-half_width, half_width]^2``."""

    half_width: int
    refinement: int

    def __post_init__(self):
        for name in ("half_width", "refinement"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        if self.half_width < 2:
            raise ConfigurationError(f"half_width must be >= 2, got {self.half_width}")
        if self.refinement < 1:
            raise ConfigurationError(f"refinement must be >= 1, got {self.refinement}")
        object.__setattr__(self, "half_width", int(self.half_width))
        object.__setattr__(self, "refinement", int(self.refinement))

    @property
    def spacing(self) -> float:
        return 1.0 / self.refinement

    @property
    def spacing_exact(self) -> Fraction:
        return Fraction(1, self.refinement)

    @property
    def side_count(self) -> int:
        return 2 * self.half_width * self.refinement + 1

    # short aliases used throughout the numerics
    h = spacing
    k = property(lambda self: self.refinement)
    ell = property(lambda self: self.half_width)
    M = side_count

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis, ascending."""
        # integer offsets keep the node coordinates exact for power-of-two k
        return (np.arange(self.side_count) - self.half_width * self.refinement) / self.refinement

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` arrays of shape (M, M) indexed ``[i-1, j-1]``."""
        x = self.axis()
        return np.meshgrid(x, x, indexing="ij")

    def origin_node(self) -> tuple[int, int]:
        c = self.half_width * self.refinement + 1
        return (c, c)


def node_coords(grid: GridSpec, i: int, j: int) -> tuple[float, float]:
    """Coordinates ``(-l + (i-1)h, -l + (j-1)h)`` of the 1-based node ``(i, j)``."""
    M = grid.side_count
    if not (1 <= i <= M and 1 <= j <= M):
        raise IndexError(f"node ({i}, {j}) outside 1..{M}")
    k = grid.refinement
    offset = grid.half_width * k + 1
    return ((i - offset) / k, (j - offset) / k)


def locate_node(grid: GridSpec, point, tolerance: float | None = None) -> tuple[int, int]:
    """Return the 1-based node coinciding with ``point``.

    Raises :class:`OffLatticeError` when no node lies within ``tolerance``
    (default ``1e-9 * h``) in the max-norm. Poles are never snapped.
    """
    if tolerance is None:
        tolerance = grid.spacing * 1e-9
    x, y = float(point[0]), float(point[1])
    ell = grid.half_width
    if not (np.isfinite(x) and np.isfinite(y)):
        raise OffLatticeError((x, y), tolerance)
    if abs(x) > ell + tolerance or abs(y) > ell + tolerance:
        raise OffLatticeError((x, y), tolerance)
    k = grid.refinement
    i = int(round((x + ell) * k)) + 1
    j = int(round((y + ell) * k)) + 1
    i = min(max(i, 1), grid.side_count)
    j = min(max(j, 1), grid.side_count)
    nx, ny = node_coords(grid, i, j)
    if max(abs(nx - x), abs(ny - y)) > tolerance:
        raise OffLatticeError((x, y), tolerance)
    return (i, j)
