"""Lattice solver for the multipole p-Laplace equation in the plane.

Minimizes a forward-difference p-Dirichlet energy on ``[-l, l]^2`` with a
Barzilai-Borwein iteration, with poles either carrying charges or pinned
to values, and checks the asymptotic behaviour of the result (flatness,
oscillation decay, tail energy, symmetry, bounds, level-set convexity,
pole singularity).
"""

__version__ = "0.1.0"

from .exceptions import (
    ConfigurationError,
    DiagnosticRefused,
    EvaluationError,
    OffLatticeError,
    SolverDivergedError,
)
from .grid import GridSpec, locate_node, node_coords
from .energy import (
    PoleMode,
    PoleSet,
    ScalarField,
    discrete_dirichlet,
    energy_gradient,
    finite_difference_gradient,
    total_energy,
)
from .solver import Solution, SolverConfig, bb_step, implied_charges, initial_guess, solve
from .diagnostics import (
    DiagnosticsReport,
    antisymmetry_residual,
    barrier_profile,
    bounds_check,
    flatness_check,
    level_set_convexity,
    oscillation_decay_fit,
    pole_exponent_fit,
    ring_stats,
    run_diagnostics,
    tail_energy,
)
