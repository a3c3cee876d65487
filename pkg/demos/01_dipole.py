"""
A pinned dipole for p = 4
=========================

Pin u = +1 at (0, 1) and u = -1 at (0, -1) on the box [-4, 4]^2 with four
nodes per unit length, minimize the lattice p-Dirichlet energy, and look at
the result: a surface with one peak and one trough, nearly flat far out,
and very steep next to each pole.
"""

import numpy as np

from plap import GridSpec, PoleSet, SolverConfig, bounds_check, flatness_check, solve

from _plotting import pyplot, surface

# %%
# Set up the lattice and the two poles. Poles must sit exactly on nodes.
grid = GridSpec(half_width=4, refinement=4)
poles = PoleSet.with_values(grid, [(0, 1), (0, -1)], [1.0, -1.0], p=4)
print(f"{grid.side_count} x {grid.side_count} nodes, h = {grid.spacing}")

# %%
# Solve. The iteration starts from a log-potential guess and stops once the
# largest gradient entry drops below the tolerance.
sol = solve(SolverConfig(poles, tolerance=1e-6, record_history=True))
print(f"converged={sol.converged} after {sol.iterations} iterations, energy {sol.energy:.6f}")

# %%
# The secant steps do not decrease the energy at every iteration. Minima over
# consecutive blocks of 100 iterations do decrease.
E = np.array(sol.energy_history)
rises = int(np.sum(np.diff(E) > 0))
block_min = [E[i:i + 100].min() for i in range(0, len(E), 100)]
print(f"{rises} single-step energy rises; block minima nonincreasing: "
      f"{all(b <= a for a, b in zip(block_min, block_min[1:]))}")

# %%
# Far from the poles the field approaches the average of the pole values.
flat = flatness_check(sol, poles)
print(f"boundary mean {flat.boundary_mean:+.4f}, limit {flat.predicted:+.1f}")

# %%
# The maximum principle: values stay between -1 and 1 and are only attained
# at the poles.
b = bounds_check(sol, poles)
print(b.verdict, "| max at node", b.argmax_node, "min at node", b.argmin_node)

plt = pyplot()
if plt is not None:
    surface(plt, sol, "pinned dipole, p = 4", "dipole.png")
