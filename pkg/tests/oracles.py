"""Independent reference computations for the test suite.

Nothing here imports the package's numerics: the energy is evaluated by
explicit loops, the p = 2 problem is solved as a sparse linear system and
radial integrals go through 1-D quadrature.
"""

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl
from scipy.integrate import quad


def brute_dirichlet(v, p, k):
    """(1/p) k^(p-2) sum over cells of (dx^2 + dy^2)^(p/2), scalar loops, 1-based."""
    M = len(v)
    total = 0.0
    for i in range(1, M):
        for j in range(1, M):
            vij = v[i - 1][j - 1]
            dx = v[i][j - 1] - vij
            dy = v[i - 1][j] - vij
            total += (dx * dx + dy * dy) ** (p / 2)
    return k ** (p - 2) / p * total


def brute_total(v, p, k, nodes, charges):
    """Dirichlet part minus sum c_i v[node_i] (1-based nodes)."""
    linear = sum(c * v[i - 1][j - 1] for (i, j), c in zip(nodes, charges))
    return brute_dirichlet(v, p, k) - linear


def _forward_laplacian(M):
    """Graph Laplacian of the forward-difference edges of the (M-1)^2 cells."""
    idx = np.arange(M * M).reshape(M, M)
    a = idx[:-1, :-1].ravel()
    right = idx[1:, :-1].ravel()
    up = idx[:-1, 1:].ravel()
    rows = np.concatenate([a, right, a, right, a, up, a, up])
    cols = np.concatenate([a, right, right, a, a, up, up, a])
    ones = np.ones_like(a, dtype=float)
    vals = np.concatenate([ones, ones, -ones, -ones, ones, ones, -ones, -ones])
    return sp.csr_matrix((vals, (rows, cols)), shape=(M * M, M * M))


def quadratic_dipole(ell, k):
    """Minimizer of the p = 2 lattice energy with charges +1/-1 at (0, +1)/(0, -1).

    For p = 2 the energy is (1/2) v.L v - c.v, so the minimizer solves L v = c;
    the constant null direction is removed by fixing v = 0 at the origin and
    the unused corner (M, M) is dropped.
    """
    M = 2 * ell * k + 1
    L = _forward_laplacian(M)
    c = np.zeros(M * M)
    c[(ell * k) * M + (ell + 1) * k] = 1.0
    c[(ell * k) * M + (ell - 1) * k] = -1.0
    keep = np.ones(M * M, dtype=bool)
    keep[(ell * k) * M + ell * k] = False
    keep[M * M - 1] = False
    u = np.zeros(M * M)
    u[keep] = spl.spsolve(L[keep][:, keep].tocsc(), c[keep])
    return u.reshape(M, M)


def dipole_potential(x, y):
    """Free-space p = 2 dipole potential -(1/4pi) log[(x^2+(y-1)^2)/(x^2+(y+1)^2)]."""
    return -(1 / (4 * math.pi)) * np.log((x**2 + (y - 1) ** 2) / (x**2 + (y + 1) ** 2))


def arc_in_box(s, ell):
    """Length of the circle |x| = s lying inside [-ell, ell]^2."""
    if s <= ell:
        return 2 * math.pi * s
    if s >= ell * math.sqrt(2):
        return 0.0
    return s * (2 * math.pi - 8 * math.acos(ell / s))


def radial_box_integral(f, r, ell):
    """Integral of f(|x|) over the part of [-ell, ell]^2 with |x| > r."""
    pieces = [(r, ell), (ell, ell * math.sqrt(2))] if r < ell else [(r, ell * math.sqrt(2))]
    return sum(quad(lambda s: f(s) * arc_in_box(s, ell), a, b, limit=200)[0] for a, b in pieces)
