"""
Independent accuracy checks
===========================

Two closed-form solutions let us measure the discretization error directly.

1. For p = 2 the lattice problem is linear. A sparse solve gives the
   quadratic dipole, which is compared with the free-space log potential.
2. For p = 4 the radial function w(s) = (R^(2/3) - s^(2/3)) / (R^(2/3) - 1)
   is p-harmonic. Pinning it on the box edge and inside the unit disc, the
   nonlinear solver should reproduce it in between.
"""

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from plap import GridSpec, PoleSet, SolverConfig, barrier_profile, solve


def quadratic_dipole(ell, k):
    M = 2 * ell * k + 1
    idx = np.arange(M * M).reshape(M, M)
    rows, cols, vals = [], [], []
    for a, b in ((idx[:-1, :-1], idx[1:, :-1]), (idx[:-1, :-1], idx[:-1, 1:])):
        a, b = a.ravel(), b.ravel()
        rows += [a, b, a, b]
        cols += [a, b, b, a]
        vals += [np.ones(a.size), np.ones(a.size), -np.ones(a.size), -np.ones(a.size)]
    L = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), (M * M, M * M))
    c = np.zeros(M * M)
    c[idx[ell * k, (ell + 1) * k]], c[idx[ell * k, (ell - 1) * k]] = 1, -1
    keep = np.ones(M * M, bool)
    keep[[idx[ell * k, ell * k], M * M - 1]] = False
    u = np.zeros(M * M)
    u[keep] = spl.spsolve(L[keep][:, keep].tocsc(), c[keep])
    return u.reshape(M, M)


# %%
# p = 2 against -(1/4pi) log[(x^2+(y-1)^2)/(x^2+(y+1)^2)] on the ring |x| = 2.
for k in (2, 4, 8, 16):
    g = GridSpec(4, k)
    X, Y = g.mesh()
    band = np.abs(np.hypot(X, Y) - 2) <= g.h / 2 + 1e-12
    exact = -np.log((X[band] ** 2 + (Y[band] - 1) ** 2) / (X[band] ** 2 + (Y[band] + 1) ** 2)) / (4 * math.pi)
    err = np.max(np.abs(quadratic_dipole(4, k)[band] - exact))
    print(f"p=2, h=1/{k:<2d}: max error on |x|=2 = {err:.4f}")
print("the error levels off: the remainder comes from the finite box, not from h")

# %%
# p = 4 barrier on the annulus 1 < |x| < 4, seen through the box [-2, 2]^2.
for k in (4, 8):
    g = GridSpec(2, k)
    X, Y = g.mesh()
    R = np.hypot(X, Y)
    pinned = np.zeros(R.shape, bool)
    pinned[[0, -1], :] = pinned[:, [0, -1]] = True
    pinned[-1, -1] = False
    pinned |= R <= 1
    w = barrier_profile(1, 4, 4, 2, np.clip(R, 1, 4))
    poles = PoleSet.with_values(g, list(zip(X[pinned], Y[pinned])), list(w[pinned]), 4)
    sol = solve(SolverConfig(poles))
    free = ~pinned
    free[-1, -1] = False
    print(f"barrier, h=1/{k}: {sol.iterations} iterations, max error {np.max(np.abs(sol.values - w)[free]):.4f}")
