"""Command-line driver: presets, solve, diagnostics and text output.

Exit codes: 0 converged and every selected diagnostic passed, 1 otherwise
(diagnostic FAIL or no convergence), 2 usage/configuration error, 3 I/O
error, 4 solver divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .diagnostics import DIAGNOSTIC_NAMES, DiagnosticsReport, run_diagnostics
from .energy import PoleMode, PoleSet
from .exceptions import ConfigurationError, SolverDivergedError
from .grid import GridSpec
from .solver import Solution, SolverConfig, solve

__all__ = [
    "PRESETS",
    "RunConfig",
    "UsageError",
    "parse_config",
    "build_poles",
    "write_field",
    "read_field",
    "write_report",
    "write_plot_matrix",
    "main",
    "REPORT_SCHEMA",
]

log = logging.getLogger(__name__)

REPORT_SCHEMA = "plap-report-1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_DIVERGED = 0, 1, 2, 3, 4

PRESETS = {
    "fig1": dict(p=4.0, half_width=4, k=4, mode="value",
                 poles=((0.0, 1.0, 1.0), (0.0, -1.0, -1.0))),
    "fig3": dict(p=3.0, half_width=4, k=4, mode="charge",
                 poles=((0.0, 1.0, 1.0), (0.0, -1.0, -1.5), (2.0, 0.0, 0.5))),
    "fig4": dict(p=5.0, half_width=4, k=4, mode="charge",
                 poles=((0.0, 1.0, 2.0), (0.0, -1.0, -2.0), (2.0, 0.0, 1.0), (-2.0, 0.0, -1.0))),
}
DEFAULTS = dict(p=4.0, half_width=4, k=4, mode="charge")


class UsageError(ConfigurationError):
    """Bad command line."""


@dataclass(frozen=True)
class RunConfig:
    p: float
    half_width: int
    k: int
    mode: str
    poles: tuple
    preset: str = "none"
    tol: float = 1e-6
    max_iters: int = 200_000
    radii: tuple | None = None
    out_field: str | None = None
    out_report: str | None = None
    out_plot: str | None = None
    seed: int = 0
    diagnostics: tuple = DIAGNOSTIC_NAMES
    overrides: tuple = field(default_factory=tuple)

    def to_args(self) -> list:
        """Argument list that reproduces this configuration without a preset."""
        args = ["--p", repr(self.p), "--half-width", str(self.half_width), "--k", str(self.k),
                "--mode", self.mode, "--tol", repr(self.tol), "--max-iters", str(self.max_iters),
                "--seed", str(self.seed),
                "--diagnostics", ",".join(self.diagnostics) if self.diagnostics else "none"]
        for x, y, c in self.poles:
            args.append(f"--pole={x!r},{y!r},{c!r}")
        if self.radii is not None:
            args += ["--radii", ",".join(repr(r) for r in self.radii)]
        for flag, value in (("--out-field", self.out_field), ("--out-report", self.out_report),
                            ("--out-plot", self.out_plot)):
            if value is not None:
                args += [flag, value]
        return args


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text, what, count=None):
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"{what}: expected {count} numbers, got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: values must be finite, got {text!r}")
    return vals


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="plap", description="Multipole p-Laplace solver with diagnostics.")
    ap.add_argument("--preset", choices=("fig1", "fig3", "fig4", "none"), default="none")
    ap.add_argument("--p", type=float)
    ap.add_argument("--half-width", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--mode", choices=("charge", "value"))
    ap.add_argument("--pole", action="append", metavar="X,Y,C",
                    help="pole position and charge (charge mode) or pinned value (value mode)")
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--max-iters", type=int, default=200_000)
    ap.add_argument("--radii", metavar="R1,R2,...")
    ap.add_argument("--out-field")
    ap.add_argument("--out-report")
    ap.add_argument("--out-plot")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--diagnostics", default="all",
                    help="'all', 'none' or a comma list of: " + ", ".join(DIAGNOSTIC_NAMES))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def _attach_pole_values(args) -> list:
    """Rewrite ``--pole -2,0,1`` as ``--pole=-2,0,1`` so a leading minus is not read as a flag."""
    args = list(args)
    out, i = [], 0
    while i < len(args):
        if args[i] == "--pole" and i + 1 < len(args):
            out.append(f"--pole={args[i + 1]}")
            i += 2
        else:
            out.append(args[i])
            i += 1
    return out


def parse_config(args) -> RunConfig:
    """Resolve command-line ``args`` into a validated :class:`RunConfig`.

    Raises :class:`UsageError` for malformed flags and
    :class:`ConfigurationError` for non-zero-sum charges or off-lattice poles.
    """
    ns = _parser().parse_args(_attach_pole_values(args))
    base = dict(PRESETS[ns.preset]) if ns.preset != "none" else dict(DEFAULTS, poles=None)
    overrides = []
    for key, value in (("p", ns.p), ("half_width", ns.half_width), ("k", ns.k), ("mode", ns.mode)):
        if value is None:
            continue
        if ns.preset != "none" and value != base[key]:
            overrides.append(f"{key}: {base[key]!r} -> {value!r}")
        base[key] = value
    if ns.pole:
        poles = tuple(_floats(s, "--pole", 3) for s in ns.pole)
        if ns.preset != "none":
            overrides.append(f"poles: {base['poles']!r} -> {poles!r}")
        base["poles"] = poles
    if not base["poles"]:
        raise UsageError("no poles: give --preset or at least one --pole X,Y,C")

    if ns.diagnostics == "all":
        diags = DIAGNOSTIC_NAMES
    elif ns.diagnostics == "none":
        diags = ()
    else:
        diags = tuple(d.strip() for d in ns.diagnostics.split(",") if d.strip())
        bad = [d for d in diags if d not in DIAGNOSTIC_NAMES]
        if bad:
            raise UsageError(f"unknown diagnostics: {', '.join(bad)}")

    for name in overrides:
        log.info("preset %s override: %s", ns.preset, name)

    cfg = RunConfig(
        p=float(base["p"]),
        half_width=int(base["half_width"]),
        k=int(base["k"]),
        mode=base["mode"],
        poles=tuple(tuple(float(t) for t in pole) for pole in base["poles"]),
        preset=ns.preset,
        tol=ns.tol,
        max_iters=ns.max_iters,
        radii=_floats(ns.radii, "--radii") if ns.radii else None,
        out_field=ns.out_field,
        out_report=ns.out_report,
        out_plot=ns.out_plot,
        seed=ns.seed,
        diagnostics=diags,
        overrides=tuple(overrides),
    )
    build_poles(cfg)
    if not cfg.tol > 0:
        raise UsageError("--tol must be positive")
    if cfg.max_iters < 1:
        raise UsageError("--max-iters must be >= 1")
    return cfg


def build_poles(cfg: RunConfig) -> PoleSet:
    grid = GridSpec(cfg.half_width, cfg.k)
    positions = [(x, y) for x, y, _ in cfg.poles]
    weights = [c for _, _, c in cfg.poles]
    return PoleSet(grid, positions, weights, PoleMode(cfg.mode), cfg.p)


# ---------------------------------------------------------------------------
# output formats


def write_field(sol: Solution, path, poles: PoleSet) -> None:
    """CSV of the field: row j is y ascending, column i is x ascending.

    Header lines start with ``#``. Values carry 17 significant digits so a
    re-read reproduces the array exactly.
    """
    grid = sol.grid
    pole_text = ";".join(
        f"{x!r},{y!r},{w!r}" for (x, y), w in zip(poles.positions, poles.weights)
    )
    header = [
        "plap field",
        f"half_width={grid.half_width}",
        f"refinement={grid.refinement}",
        f"side_count={grid.side_count}",
        f"p={poles.p!r}",
        f"mode={poles.mode.value}",
        f"poles={pole_text}",
        f"converged={'true' if sol.converged else 'false'}",
        f"iterations={sol.iterations}",
        f"residual={sol.final_residual!r}",
        "corner_fill=v[M,M] is the mean of v[M-1,M] and v[M,M-1]; not solved for",
        "layout=row j holds y=-l+(j-1)h, column i holds x=-l+(i-1)h",
    ]
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for row in sol.values.T:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_field(path) -> tuple[np.ndarray, dict]:
    """Inverse of :func:`write_field`: ``values[i-1, j-1]`` and the header."""
    header, rows = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if sep:
                    header[key] = value
                continue
            rows.append([float(t) for t in line.split(",")])
    return np.array(rows).T.copy(), header


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_report(report: DiagnosticsReport | dict, path, config: RunConfig | None = None,
                 sol: Solution | None = None, extra: dict | None = None) -> None:
    """JSON report: schema tag, config echo, solver summary, one key per diagnostic."""
    doc = {"schema": REPORT_SCHEMA}
    if config is not None:
        doc["config"] = {
            "preset": config.preset,
            "p": config.p,
            "half_width": config.half_width,
            "k": config.k,
            "mode": config.mode,
            "poles": [list(p) for p in config.poles],
            "tol": config.tol,
            "max_iters": config.max_iters,
            "radii": list(config.radii) if config.radii is not None else None,
            "seed": config.seed,
            "diagnostics": list(config.diagnostics),
            "overrides": list(config.overrides),
            "argv": config.to_args(),
        }
    if sol is not None:
        doc["solver"] = {
            "converged": sol.converged,
            "iterations": sol.iterations,
            "final_residual": sol.final_residual,
            "energy": sol.energy,
            "anchor": list(sol.anchor) if sol.anchor else None,
            "side_count": sol.grid.side_count,
        }
    if extra:
        doc.update(extra)
    sections = report.to_dict() if isinstance(report, DiagnosticsReport) else dict(report)
    doc.update(sections)
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2)
        fh.write("\n")


def write_plot_matrix(sol: Solution, path) -> None:
    """Whitespace matrix in gnuplot's ``nonuniform matrix`` layout.

    The first row is ``M x_1 ... x_M``; every following row is
    ``y_j u(x_1, y_j) ... u(x_M, y_j)``.
    """
    grid = sol.grid
    x = grid.axis()
    with open(path, "w") as fh:
        fh.write(" ".join([str(grid.side_count)] + [f"{t:.17g}" for t in x]) + "\n")
        for j, row in enumerate(sol.values.T):
            fh.write(" ".join([f"{x[j]:.17g}"] + [f"{t:.17g}" for t in row]) + "\n")


# ---------------------------------------------------------------------------


def _euler_lagrange_check(sol: Solution, poles: PoleSet, seed: int, count: int = 5) -> dict:
    """``sum g phi`` for random test vectors vanishing at poles and the corner."""
    from .energy import energy_gradient

    g = energy_gradient(sol.field, poles).values
    rng = np.random.default_rng(seed)
    mask = poles.free_mask()
    ii, jj = poles.index_arrays()
    mask[ii, jj] = False
    worst = 0.0
    for _ in range(count):
        phi = np.where(mask, rng.standard_normal(g.shape), 0.0)
        worst = max(worst, abs(float(np.sum(g * phi))) / float(np.sum(np.abs(phi))))
    return {"seed": seed, "vectors": count, "max_normalized_pairing": worst,
            "verdict": f"{'PASS' if worst < sol.tolerance else 'FAIL'} "
                       f"(max |<g,phi>|/|phi|_1 = {worst:.3g} vs tol {sol.tolerance:g})"}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigurationError as exc:
        print(f"plap: error: {exc}", file=sys.stderr)
        _parser().print_usage(sys.stderr)
        return EXIT_USAGE
    poles = build_poles(cfg)
    try:
        sol = solve(SolverConfig(poles, tolerance=cfg.tol, max_iterations=cfg.max_iters))
    except SolverDivergedError as exc:
        print(f"plap: {exc}", file=sys.stderr)
        return EXIT_DIVERGED

    report = run_diagnostics(sol, poles, radii=cfg.radii, select=cfg.diagnostics)
    print(f"solve: converged={sol.converged} iterations={sol.iterations} "
          f"residual={sol.final_residual:.3e} energy={sol.energy:.10g}")
    for name, verdict in report.verdicts().items():
        print(f"{name}: {verdict}")

    try:
        if cfg.out_field:
            write_field(sol, cfg.out_field, poles)
        if cfg.out_plot:
            write_plot_matrix(sol, cfg.out_plot)
        if cfg.out_report:
            extra = {"euler_lagrange": _euler_lagrange_check(sol, poles, cfg.seed)}
            write_report(report, cfg.out_report, cfg, sol, extra=extra)
    except OSError as exc:
        print(f"plap: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    if sol.converged and report.all_pass():
        return EXIT_OK
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
