"""
Behaviour far from the poles and near them
==========================================

For the pinned dipole we check four asymptotic statements on the lattice:

* ring oscillation shrinks by a fixed factor when the radius doubles;
* the tail energy F(r) = r^2 * (energy outside radius r) does not increase;
* the field is odd under the reflection that swaps the poles;
* near a pole, |Du| grows like rho^(-1/3) for p = 4.

The box is finite. The tail-energy integrals stop at the box edge, and on
the default [-4, 4]^2 box that truncation dominates the identity check.
Doubling the box shrinks the gap.
"""

from plap import (
    GridSpec,
    PoleSet,
    SolverConfig,
    antisymmetry_residual,
    level_set_convexity,
    oscillation_decay_fit,
    pole_exponent_fit,
    ring_stats,
    solve,
    tail_energy,
)

radii = [1.5, 2, 2.5, 3]


def dipole(ell, k, tol=1e-6):
    poles = PoleSet.with_values(GridSpec(ell, k), [(0, 1), (0, -1)], [1, -1], 4)
    return solve(SolverConfig(poles, tolerance=tol, max_iterations=10**6)), poles


sol, poles = dipole(4, 4)

# %%
# Oscillation on rings about the origin.
survey = ring_stats(sol, radii, poles)
for s in survey:
    print(f"r={s.radius:3.1f}  min {s.min:+.4f}  max {s.max:+.4f}  omega {s.oscillation:.4f}")
fit = oscillation_decay_fit(survey.stats)
print(fit.verdict)

# %%
# Tail energy and the radial identity. F is monotone; the identity gap is
# large on this box and shrinks when the box grows.
for ell in (4, 8):
    s_ell, p_ell = dipole(ell, 4, tol=1e-8)
    te = tail_energy(s_ell, 4, radii, p_ell)
    gaps = ", ".join(f"{t.relative_gap:.3f}" for t in te)
    print(f"box half-width {ell}: F monotone={te.monotone}, |F-RHS|/F = [{gaps}]")

# %%
# Reflection y -> -y should map u to -u. The lattice stencil is one-sided,
# so the residual is O(h) and halves when h halves.
fine, fine_poles = dipole(4, 8)
r4, r8 = antisymmetry_residual(sol, poles), antisymmetry_residual(fine, fine_poles)
print(f"antisymmetry residual h=1/4: {r4:.4f}, h=1/8: {r8:.4f}, ratio {r8 / r4:.2f}")

# %%
# Superlevel sets {u >= t} for 0 < t < 1 are convex. On the small box the
# lower levels still reach the outer ring.
for t in (0.25, 0.5, 0.75):
    res = level_set_convexity(sol, poles, t)
    print(f"t={t}: score {res.score:.3f}, touches boundary {res.touches_boundary}")

# %%
# Blow-up rate of the gradient at the pole (0, 1).
for s_, p_ in ((sol, poles), (fine, fine_poles)):
    pf = pole_exponent_fit(s_, p_, 0)
    print(f"h={s_.grid.spacing}: slope {pf.fitted:.3f} (predicted {pf.predicted:.3f})")
