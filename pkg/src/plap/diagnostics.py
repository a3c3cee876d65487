"""Quantitative checks of the asymptotic behaviour of a converged solution.

Everything here is a pure function of a :class:`~plap.solver.Solution`, the
:class:`~plap.energy.PoleSet` it was computed for and a few parameters.
Suprema over exterior regions ``|x| >= r`` are replaced by statistics over
ring bands ``r - h/2 <= |x| <= r + h/2``; for exterior p-harmonic functions
the extreme values over ``|x| >= r`` are attained on ``|x| = r``, so rings
are faithful proxies on a truncated box.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .energy import PoleMode, PoleSet, dirichlet_gradient_array
from .exceptions import DiagnosticRefused
from .solver import Solution

__all__ = [
    "RingStat",
    "RingSurvey",
    "OscillationFit",
    "TailSample",
    "TailEnergy",
    "BoundsResult",
    "LevelSetResult",
    "PoleExponentFit",
    "FlatnessResult",
    "DiagnosticsReport",
    "flatness_check",
    "ring_stats",
    "oscillation_decay_fit",
    "tail_energy",
    "antisymmetry_residual",
    "bounds_check",
    "level_set_convexity",
    "pole_exponent_fit",
    "barrier_profile",
    "node_gradient",
    "cell_gradient",
    "run_diagnostics",
    "DIAGNOSTIC_NAMES",
]

N_DIM = 2
MIN_RING_SAMPLES = 8
CONVEXITY_THRESHOLD = 0.98
TAIL_MONOTONE_SLACK = 1e-2
TAIL_IDENTITY_TOL = 0.2
FLATNESS_TOL = 0.05
POLE_EXPONENT_TOL = 0.15
ANTISYMMETRY_FACTOR = 5.0

DIAGNOSTIC_NAMES = (
    "flatness",
    "oscillation",
    "tail_energy",
    "antisymmetry",
    "bounds",
    "level_sets",
    "pole_exponents",
)


def _pass(ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} ({detail})"


def _skipped(reason: str) -> str:
    return f"SKIPPED ({reason})"


def _interior_mask(M: int) -> np.ndarray:
    mask = np.zeros((M, M), dtype=bool)
    mask[1:-1, 1:-1] = True
    return mask


def _solved_mask(M: int) -> np.ndarray:
    mask = np.ones((M, M), dtype=bool)
    mask[-1, -1] = False
    return mask


def node_gradient(v: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Centred differences at interior nodes; boundary entries are NaN."""
    gx = np.full(v.shape, np.nan)
    gy = np.full(v.shape, np.nan)
    gx[1:-1, 1:-1] = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * h)
    gy[1:-1, 1:-1] = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * h)
    return gx, gy


def cell_gradient(v: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradient at cell centres from the four corner values, shape (M-1, M-1)."""
    ux = ((v[1:, 1:] + v[1:, :-1]) - (v[:-1, 1:] + v[:-1, :-1])) / (2 * h)
    uy = ((v[1:, 1:] + v[:-1, 1:]) - (v[1:, :-1] + v[:-1, :-1])) / (2 * h)
    return ux, uy


def _pole_values(sol: Solution, poles: PoleSet) -> np.ndarray:
    """Pinned values in value mode, field values at the poles otherwise."""
    if poles.mode is PoleMode.VALUE:
        return poles.values
    ii, jj = poles.index_arrays()
    return sol.values[ii, jj]


def _check_pairing(sol: Solution, poles: PoleSet):
    if sol.grid != poles.grid:
        raise DiagnosticRefused("solution and pole set live on different grids")


# ---------------------------------------------------------------------------
# flatness


@dataclass
class FlatnessResult:
    boundary_mean: float
    predicted: float | None
    deviation: float | None


def flatness_check(sol: Solution, poles: PoleSet) -> FlatnessResult:
    """Mean over the outermost node ring against the dipole limit ``(a1+a2)/2``.

    The predicted limit is only defined for two poles; for other counts it
    is returned as ``None``.
    """
    _check_pairing(sol, poles)
    if not sol.converged:
        raise DiagnosticRefused("flatness check needs a converged solution")
    v = sol.values
    ring = np.ones(v.shape, dtype=bool)
    ring[1:-1, 1:-1] = False
    ring[-1, -1] = False
    boundary_mean = float(np.mean(v[ring]))
    if len(poles) != 2:
        return FlatnessResult(boundary_mean, None, None)
    predicted = float(0.5 * np.sum(_pole_values(sol, poles)))
    return FlatnessResult(boundary_mean, predicted, abs(boundary_mean - predicted))


# ---------------------------------------------------------------------------
# rings and oscillation


@dataclass
class RingStat:
    radius: float
    min: float
    max: float
    mean: float
    oscillation: float
    sample_count: int


@dataclass
class RingSurvey:
    """Ring statistics plus the weak-comparison trend across radii."""

    stats: list
    excluded: list = field(default_factory=list)
    trend_ok: bool | None = None
    trend_slack: float = 0.0

    def __iter__(self):
        return iter(self.stats)

    def __len__(self):
        return len(self.stats)

    def __getitem__(self, i):
        return self.stats[i]


def ring_stats(sol: Solution, radii: Iterable[float], poles: PoleSet | None = None) -> RingSurvey:
    """Field statistics on ring bands about the origin.

    Radii outside ``(max pole radius + h, l - h)`` and bands with fewer than
    8 nodes are excluded and listed in ``excluded``. The trend check asks
    ring maxima to be nonincreasing and ring minima nondecreasing in r,
    up to a slack of ``2 h`` times the largest gradient norm seen.
    """
    grid = sol.grid
    h = grid.spacing
    X, Y = grid.mesh()
    R = np.hypot(X, Y)
    v = sol.values
    solved = _solved_mask(grid.side_count)
    lo = (poles.max_radius() if poles is not None else 0.0) + h
    hi = grid.half_width - h

    stats, excluded = [], []
    for r in sorted(float(r) for r in radii):
        if not (lo < r < hi):
            excluded.append((r, f"outside ({lo:g}, {hi:g})"))
            continue
        band = solved & (R >= r - h / 2 - 1e-12) & (R <= r + h / 2 + 1e-12)
        n = int(band.sum())
        if n < MIN_RING_SAMPLES:
            excluded.append((r, f"only {n} samples"))
            continue
        vals = v[band]
        lo_v, hi_v = float(vals.min()), float(vals.max())
        stats.append(RingStat(r, lo_v, hi_v, float(vals.mean()), hi_v - lo_v, n))

    survey = RingSurvey(stats, excluded)
    if len(stats) >= 2:
        gx, gy = node_gradient(v, h)
        G = np.hypot(gx, gy)
        zone = (R >= stats[0].radius - h) & (R <= stats[-1].radius + h) & np.isfinite(G)
        lip = float(G[zone].max()) if zone.any() else 0.0
        slack = 2 * h * lip
        ok = all(
            b.max <= a.max + slack and b.min >= a.min - slack
            for a, b in zip(stats, stats[1:])
        )
        survey.trend_ok = ok
        survey.trend_slack = slack
    return survey


@dataclass
class OscillationFit:
    mu_hat: float
    alpha_hat: float
    loglog_slope: float | None
    pairs: list
    verdict: str


def oscillation_decay_fit(stats: Iterable[RingStat]) -> OscillationFit:
    """Dyadic contraction factor of the ring oscillation.

    ``mu_hat`` is the largest ratio ``omega(2r)/omega(r)`` over dyadic pairs
    present in ``stats``; ``alpha_hat = -ln(mu_hat)/ln 2`` is the implied
    algebraic decay rate. Pairs with ``omega(r) = 0`` are skipped.
    """
    stats = list(stats)
    by_radius = {s.radius: s for s in stats}
    pairs = []
    for r, s in by_radius.items():
        partner = next(
            (t for r2, t in by_radius.items() if abs(r2 - 2 * r) <= 1e-9 * max(1.0, r)), None
        )
        if partner is None or s.oscillation == 0.0:
            continue
        pairs.append((r, 2 * r, partner.oscillation / s.oscillation))
    if not pairs:
        raise DiagnosticRefused("no dyadic pair (r, 2r) with nonzero oscillation")
    mu = max(q for _, _, q in pairs)
    alpha = math.inf if mu == 0.0 else -math.log(mu) / math.log(2.0)

    positive = [s for s in stats if s.oscillation > 0]
    slope = None
    if len(positive) >= 2:
        slope = float(
            np.polyfit(
                np.log([s.radius for s in positive]),
                np.log([s.oscillation for s in positive]),
                1,
            )[0]
        )
    verdict = _pass(mu < 1.0, f"mu_hat={mu:.6g} {'<' if mu < 1 else '>='} 1, alpha_hat={alpha:.6g}")
    return OscillationFit(mu, alpha, slope, pairs, verdict)


# ---------------------------------------------------------------------------
# tail energy


@dataclass
class TailSample:
    radius: float
    F: float
    RHS: float
    relative_gap: float
    low_confidence: bool


@dataclass
class TailEnergy:
    samples: list
    monotone: bool
    excluded: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]


def tail_energy(
    sol: Solution,
    p: float,
    radii: Iterable[float],
    poles: PoleSet | None = None,
    monotone_slack: float = TAIL_MONOTONE_SLACK,
) -> TailEnergy:
    """Both sides of the tail-energy identity on the box.

    ``F(r) = r^(p-2) * int_{|x|>r} |Du|^p`` and
    ``RHS(r) = p * int_{|x|>r} |x|^(p-2) |Du|^(p-2) (Du . x/|x|)^2``, with Du
    at cell centres and the midpoint rule over cells whose centre lies
    beyond r. The box is finite, so the integrals stop at its edge. Radii
    must lie in ``[max pole radius + 2h, l - 2h]``; radii within 2h of that
    cap are flagged ``low_confidence``.
    """
    grid = sol.grid
    h = grid.spacing
    lo = (poles.max_radius() if poles is not None else 0.0) + 2 * h
    hi = grid.half_width - 2 * h
    eps = 1e-12
    kept, excluded = [], []
    for r in sorted(float(r) for r in radii):
        if lo - eps <= r <= hi + eps:
            kept.append(r)
        else:
            excluded.append((r, f"outside [{lo:g}, {hi:g}]"))
    if not kept:
        raise DiagnosticRefused(f"no radius in [{lo:g}, {hi:g}]")

    x = grid.axis()
    c = 0.5 * (x[:-1] + x[1:])
    CX, CY = np.meshgrid(c, c, indexing="ij")
    Rc = np.hypot(CX, CY)
    ux, uy = cell_gradient(sol.values, h)
    G = np.hypot(ux, uy)
    with np.errstate(invalid="ignore", divide="ignore"):
        ur = np.where(Rc > 0, (ux * CX + uy * CY) / Rc, 0.0)
    dirichlet = G**p
    radial = p * Rc ** (p - N_DIM) * G ** (p - 2) * ur**2
    area = h * h

    samples = []
    for r in kept:
        outside = Rc > r
        F = r ** (p - N_DIM) * float(np.sum(dirichlet[outside])) * area
        rhs = float(np.sum(radial[outside])) * area
        gap = abs(F - rhs) / F if F > 0 else (0.0 if rhs == 0 else math.inf)
        samples.append(TailSample(r, F, rhs, gap, r > hi - 2 * h + eps))

    monotone = all(
        b.F <= a.F * (1 + monotone_slack) + 1e-300 for a, b in zip(samples, samples[1:])
    )
    return TailEnergy(samples, monotone, excluded)


# ---------------------------------------------------------------------------
# antisymmetry, bounds, level sets


def _reflection(poles: PoleSet):
    """Axis across which the two poles mirror each other: 'y' or 'x'."""
    if len(poles) != 2:
        raise DiagnosticRefused("antisymmetry needs exactly two poles")
    (x0, y0), (x1, y1) = poles.positions
    if x0 == x1 and y0 == -y1 and y0 != 0:
        return "y"
    if y0 == y1 and x0 == -x1 and x0 != 0:
        return "x"
    raise DiagnosticRefused(
        "poles are not mirror images across a coordinate axis; reflection is not lattice-exact"
    )


def antisymmetry_residual(sol: Solution, poles: PoleSet) -> float:
    """``max |(u(x) - m) + (u(Rx) - m)|`` over nodes, R the mirror swapping the poles.

    ``m`` is the mean of the two pole values (pinned values in value mode).
    """
    _check_pairing(sol, poles)
    axis = _reflection(poles)
    v = sol.values
    m = 0.5 * float(np.sum(_pole_values(sol, poles)))
    mirrored = v[:, ::-1] if axis == "y" else v[::-1, :]
    solved = _solved_mask(v.shape[0])
    both = solved & (solved[:, ::-1] if axis == "y" else solved[::-1, :])
    return float(np.max(np.abs((v - m) + (mirrored - m))[both]))


@dataclass
class BoundsResult:
    field_min: float
    field_max: float
    a_min: float
    a_max: float
    epsilon: float
    strict_off_poles: bool | None
    argmax_node: tuple
    argmin_node: tuple
    verdict: str


def bounds_check(sol: Solution, poles: PoleSet) -> BoundsResult:
    """Maximum principle ``min a_i <= u <= max a_i`` up to ``10 * tolerance``.

    In charge mode the ``a_i`` are the field values at the poles.
    ``strict_off_poles`` is ``None`` when all ``a_i`` coincide.
    """
    _check_pairing(sol, poles)
    v = sol.values
    solved = _solved_mask(v.shape[0])
    a = _pole_values(sol, poles)
    if len(a) == 0:
        raise DiagnosticRefused("no poles")
    eps = 10 * sol.tolerance
    vals = np.where(solved, v, np.nan)
    fmin, fmax = float(np.nanmin(vals)), float(np.nanmax(vals))
    amin, amax = float(np.min(a)), float(np.max(a))
    imax = np.unravel_index(np.nanargmax(vals), v.shape)
    imin = np.unravel_index(np.nanargmin(vals), v.shape)

    strict = None
    if amax > amin:
        off = solved.copy()
        ii, jj = poles.index_arrays()
        off[ii, jj] = False
        strict = bool(np.all((v[off] > amin) & (v[off] < amax)))
    ok = fmin >= amin - eps and fmax <= amax + eps
    detail = f"field in [{fmin:.9g}, {fmax:.9g}], poles in [{amin:.9g}, {amax:.9g}], eps={eps:.1e}"
    return BoundsResult(
        fmin, fmax, amin, amax, eps, strict,
        (int(imax[0]) + 1, int(imax[1]) + 1),
        (int(imin[0]) + 1, int(imin[1]) + 1),
        _pass(ok, detail),
    )


@dataclass
class LevelSetResult:
    t: float
    score: float
    set_size: int
    hull_count: int
    touches_boundary: bool
    verdict: str


def _lattice_points_in_hull(points: np.ndarray, nodes: np.ndarray, h: float) -> int:
    tol = 1e-9 * h
    try:
        hull = ConvexHull(points)
    except (QhullError, ValueError):
        # collinear or too few points: hull is the segment between extremes
        if len(points) == 1:
            return 1
        centre = points.mean(axis=0)
        direction = points[np.argmax(np.linalg.norm(points - centre, axis=1))] - centre
        direction /= np.linalg.norm(direction)
        t = (points - centre) @ direction
        rel = nodes - centre
        along = rel @ direction
        across = np.abs(rel @ np.array([-direction[1], direction[0]]))
        return int(np.sum((across <= tol) & (along >= t.min() - tol) & (along <= t.max() + tol)))
    A, b = hull.equations[:, :-1], hull.equations[:, -1]
    inside = np.all(nodes @ A.T + b <= tol, axis=1)
    return int(inside.sum())


def level_set_convexity(sol: Solution, poles: PoleSet, t: float) -> LevelSetResult:
    """Lattice convexity score of the superlevel set ``{u >= t}``.

    The score is the set size divided by the number of lattice nodes in its
    convex hull, so a lattice-convex set scores 1. Only dipoles are
    supported, with ``t`` strictly between the mean pole value and the
    larger pole value.
    """
    _check_pairing(sol, poles)
    if len(poles) != 2:
        raise DiagnosticRefused("level-set convexity is defined for dipoles only")
    a = _pole_values(sol, poles)
    mid, top = 0.5 * float(a.sum()), float(a.max())
    if not (mid < t < top):
        raise DiagnosticRefused(
            f"t={t:g} must lie strictly between the mid-value {mid:g} and the top value {top:g}"
        )
    grid = sol.grid
    v = sol.values
    X, Y = grid.mesh()
    solved = _solved_mask(grid.side_count)
    S = solved & (v >= t)
    size = int(S.sum())
    if size == 0:
        raise DiagnosticRefused(f"superlevel set {{u >= {t:g}}} is empty")
    pts = np.column_stack([X[S], Y[S]])
    nodes = np.column_stack([X[solved], Y[solved]])
    count = _lattice_points_in_hull(pts, nodes, grid.spacing)
    score = size / count
    touches = bool((S & ~_interior_mask(grid.side_count)).any())
    ok = score >= CONVEXITY_THRESHOLD and not touches
    detail = f"score={score:.6g} (threshold {CONVEXITY_THRESHOLD}), touches_boundary={touches}"
    return LevelSetResult(float(t), score, size, count, touches, _pass(ok, detail))


# ---------------------------------------------------------------------------
# pole exponent and barrier


@dataclass
class PoleExponentFit:
    pole: tuple
    fitted: float
    predicted: float
    radii: list
    mean_gradient: list


def pole_exponent_fit(
    sol: Solution,
    poles: PoleSet,
    pole_index: int,
    gradient_norm: np.ndarray | None = None,
) -> PoleExponentFit:
    """Log-log slope of the mean gradient norm on rings about one pole.

    Rings sit at ``rho = 2h, 3h, ..., 10h``, keeping only those within half
    the distance to the nearest other pole and at least ``h`` inside the
    box. Fewer than three usable rings is a refusal. The prediction is the
    blow-up exponent ``(p-2)/(p-1) - 1``.

    ``gradient_norm`` replaces the centred-difference |Du| at the nodes,
    e.g. with an analytic gradient when checking the fit itself.
    """
    _check_pairing(sol, poles)
    if not 0 <= pole_index < len(poles):
        raise DiagnosticRefused(f"pole index {pole_index} out of range")
    grid = sol.grid
    h = grid.spacing
    px, py = poles.positions[pole_index]
    i, j = poles.nodes[pole_index]

    if poles.mode is PoleMode.CHARGE:
        charge = float(poles.charges[pole_index])
    else:
        charge = float(dirichlet_gradient_array(sol.values, poles.p, grid.refinement)[i - 1, j - 1])
    if abs(charge) <= 10 * sol.tolerance:
        raise DiagnosticRefused(f"pole {pole_index} carries no charge")

    others = [math.hypot(px - qx, py - qy) for n, (qx, qy) in enumerate(poles.positions) if n != pole_index]
    reach = min(others) / 2 if others else math.inf
    reach = min(reach, grid.half_width - max(abs(px), abs(py)) - h)
    radii = [m * h for m in range(2, 11) if m * h <= reach + 1e-12]
    if len(radii) < 3:
        raise DiagnosticRefused(
            f"only {len(radii)} ring(s) in [2h, 10h] clear of other poles and the box edge"
        )

    X, Y = grid.mesh()
    D = np.hypot(X - px, Y - py)
    if gradient_norm is None:
        gx, gy = node_gradient(sol.values, h)
        G = np.hypot(gx, gy)
    else:
        G = np.where(_interior_mask(grid.side_count), np.asarray(gradient_norm, dtype=float), np.nan)
    means = []
    for rho in radii:
        band = (np.abs(D - rho) <= h / 2 + 1e-12) & np.isfinite(G)
        means.append(float(G[band].mean()))
    fitted = float(np.polyfit(np.log(radii), np.log(means), 1)[0])
    predicted = (poles.p - N_DIM) / (poles.p - 1) - 1
    return PoleExponentFit((px, py), fitted, predicted, radii, means)


def barrier_profile(r0: float, R: float, p: float, n: int, samples: Sequence[float]) -> np.ndarray:
    """Radial p-harmonic barrier on the annulus ``r0 <= |x| <= R``.

    ``w(s) = (R^q - s^q) / (R^q - r0^q)`` with ``q = (p-n)/(p-1)``, equal to
    1 on the inner circle and 0 on the outer one.
    """
    if not 1 <= r0 < R:
        raise DiagnosticRefused(f"need 1 <= r0 < R, got r0={r0:g}, R={R:g}")
    if not p > n:
        raise DiagnosticRefused(f"need p > n, got p={p:g}, n={n}")
    s = np.asarray(samples, dtype=float)
    span = 1e-12 * R
    if np.any(s < r0 - span) or np.any(s > R + span):
        raise DiagnosticRefused(f"samples must lie in [{r0:g}, {R:g}]")
    q = (p - n) / (p - 1)
    return (R**q - s**q) / (R**q - r0**q)


# ---------------------------------------------------------------------------
# report


@dataclass
class DiagnosticsReport:
    flatness: dict | None = None
    oscillation: dict | None = None
    tail_energy: dict | None = None
    antisymmetry: dict | None = None
    bounds: dict | None = None
    level_sets: dict | None = None
    pole_exponents: dict | None = None

    def sections(self) -> dict:
        return {name: getattr(self, name) for name in DIAGNOSTIC_NAMES if getattr(self, name) is not None}

    def verdicts(self) -> dict:
        return {name: sec["verdict"] for name, sec in self.sections().items()}

    def all_pass(self) -> bool:
        return not any(v.startswith("FAIL") for v in self.verdicts().values())

    def to_dict(self) -> dict:
        return self.sections()


DEFAULT_RADII = (1.5, 2.0, 2.5, 3.0)


def _default_levels(sol, poles):
    a = _pole_values(sol, poles)
    mid, top = 0.5 * float(a.sum()), float(a.max())
    return [mid + f * (top - mid) for f in (0.25, 0.5, 0.75)]


def run_diagnostics(
    sol: Solution,
    poles: PoleSet,
    radii: Sequence[float] | None = None,
    levels: Sequence[float] | None = None,
    select: Iterable[str] | None = None,
) -> DiagnosticsReport:
    """Run the selected diagnostics and collect JSON-ready sections.

    A diagnostic whose preconditions fail is reported as SKIPPED with the
    reason; it never aborts the others.
    """
    select = set(DIAGNOSTIC_NAMES if select is None else select)
    unknown = select - set(DIAGNOSTIC_NAMES)
    if unknown:
        raise ValueError(f"unknown diagnostics: {sorted(unknown)}")
    radii = list(DEFAULT_RADII if radii is None else radii)
    h = sol.grid.spacing
    report = DiagnosticsReport()

    def guarded(name, fn):
        if name not in select:
            return
        try:
            section = fn()
        except DiagnosticRefused as exc:
            section = {"verdict": _skipped(str(exc))}
        setattr(report, name, section)

    def flatness():
        res = flatness_check(sol, poles)
        out = asdict(res)
        if res.predicted is None:
            out["verdict"] = _skipped("limit formula known only for two poles")
        else:
            out["verdict"] = _pass(
                res.deviation < FLATNESS_TOL,
                f"|{res.boundary_mean:.6g} - {res.predicted:.6g}| = {res.deviation:.3g}, tol {FLATNESS_TOL}",
            )
        return out

    def oscillation():
        survey = ring_stats(sol, radii, poles)
        out = {
            "rings": [asdict(s) for s in survey],
            "excluded": [list(e) for e in survey.excluded],
            "comparison_trend_ok": survey.trend_ok,
            "comparison_slack": survey.trend_slack,
        }
        fit = oscillation_decay_fit(survey.stats)
        out.update(
            mu_hat=fit.mu_hat,
            alpha_hat=fit.alpha_hat,
            loglog_slope=fit.loglog_slope,
            pairs=[list(pr) for pr in fit.pairs],
        )
        trend = survey.trend_ok is not False
        out["verdict"] = _pass(
            fit.mu_hat < 1 and trend,
            f"mu_hat={fit.mu_hat:.6g}, alpha_hat={fit.alpha_hat:.6g}, ring trend ok={survey.trend_ok}",
        )
        return out

    def tail():
        te = tail_energy(sol, poles.p, radii, poles)
        worst = max(s.relative_gap for s in te)
        out = {
            "samples": [asdict(s) for s in te],
            "excluded": [list(e) for e in te.excluded],
            "monotone": te.monotone,
            "max_relative_gap": worst,
            "identity_verdict": _pass(
                worst <= TAIL_IDENTITY_TOL,
                f"max |F-RHS|/F = {worst:.4g}, tol {TAIL_IDENTITY_TOL}; box truncation included",
            ),
        }
        Fs = ", ".join(f"{s.F:.6g}" for s in te)
        out["verdict"] = _pass(te.monotone, f"F(r) = [{Fs}], slack {TAIL_MONOTONE_SLACK}")
        return out

    def antisym():
        res = antisymmetry_residual(sol, poles)
        bound = ANTISYMMETRY_FACTOR * h
        return {
            "residual": res,
            "bound": bound,
            "verdict": _pass(res <= bound, f"residual={res:.6g} <= {ANTISYMMETRY_FACTOR:g}h={bound:.6g}"),
        }

    def bounds():
        res = bounds_check(sol, poles)
        return asdict(res)

    def levels_fn():
        ts = list(levels) if levels is not None else _default_levels(sol, poles)
        results = [level_set_convexity(sol, poles, t) for t in ts]
        ok = all(r.verdict.startswith("PASS") for r in results)
        scores = ", ".join(f"t={r.t:.4g}: {r.score:.4g}" for r in results)
        return {"levels": [asdict(r) for r in results], "verdict": _pass(ok, scores)}

    def exponents():
        fits, skipped = [], []
        for idx in range(len(poles)):
            try:
                fits.append(pole_exponent_fit(sol, poles, idx))
            except DiagnosticRefused as exc:
                skipped.append([idx, str(exc)])
        if not fits:
            raise DiagnosticRefused("; ".join(s for _, s in skipped) or "no poles")
        worst = max(abs(f.fitted - f.predicted) for f in fits)
        return {
            "fits": [asdict(f) for f in fits],
            "skipped": skipped,
            "verdict": _pass(
                worst <= POLE_EXPONENT_TOL,
                f"max |fitted - predicted| = {worst:.4g}, tol {POLE_EXPONENT_TOL}",
            ),
        }

    guarded("flatness", flatness)
    guarded("oscillation", oscillation)
    guarded("tail_energy", tail)
    guarded("antisymmetry", antisym)
    guarded("bounds", bounds)
    guarded("level_sets", levels_fn)
    guarded("pole_exponents", exponents)
    return report
