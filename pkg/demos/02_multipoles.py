"""
Three and four charges
======================

With more than two poles it is natural to prescribe charges instead of
values. The charges must add up to zero. Charge-mode solutions are only
defined up to a constant, so the solver shifts them to vanish at the origin.
"""

from plap import GridSpec, PoleSet, SolverConfig, bounds_check, run_diagnostics, solve

from _plotting import pyplot, surface

plt = pyplot()
grid = GridSpec(4, 4)

cases = {
    "three poles, p = 3": PoleSet.with_charges(
        grid, [(0, 1), (0, -1), (2, 0)], [1, -1.5, 0.5], p=3
    ),
    "four poles, p = 5": PoleSet.with_charges(
        grid, [(0, 1), (0, -1), (2, 0), (-2, 0)], [2, -2, 1, -1], p=5
    ),
}

# %%
# Each positive charge produces a local maximum and each negative charge a
# local minimum. The global extremes sit at poles.
for i, (title, poles) in enumerate(cases.items()):
    sol = solve(SolverConfig(poles))
    print(f"\n{title}: {sol.iterations} iterations, anchor node {sol.anchor}")
    for pos, c, node in zip(poles.positions, poles.charges, poles.nodes):
        print(f"  pole {pos} charge {c:+g}: u = {sol.field.at(*node):+.4f}")
    print(" ", bounds_check(sol, poles).verdict)
    report = run_diagnostics(sol, poles, select=["oscillation", "pole_exponents", "flatness"])
    for name, verdict in report.verdicts().items():
        print(f"  {name}: {verdict}")
    if plt is not None:
        surface(plt, sol, title, f"multipole_{i + 3}.png")
