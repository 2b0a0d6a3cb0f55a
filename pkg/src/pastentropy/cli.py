"""Command-line front end.

Scalar and verdict results go to stdout as JSON, grids go to CSV files. Exit
status: 0 on success, 2 on invalid input (bad flags, bad distribution spec,
unmet preconditions), 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from dataclasses import asdict
from typing import Optional, Sequence, TextIO

import numpy as np

from . import characterization as chz
from .distributions import parse_distribution
from .errors import InputError, NumericalError
from .estimation import Sample, past_entropy_estimate
from .measures import MeasureCurve, MeasureKind, measure_curve, measure_value
from .numerics import QuadratureConfig, RootConfig

__all__ = ["run", "main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_QUAD_DEFAULTS = QuadratureConfig()
_ROOT_DEFAULTS = RootConfig()


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        # abbreviated flags would slip past the unknown-flag check
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _number(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _count(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    return n


def _distribution(text):
    try:
        return parse_distribution(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range(text):
    """``lo:hi:n`` to ``n`` equally spaced values (``n = 1`` gives ``lo``)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    lo, hi = _number(parts[0]), _number(parts[1])
    n = _count(parts[2])
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: need finite lo <= hi and n >= 1")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _param_grid(text):
    grid = {}
    for item in text.split(","):
        name, sep, rng = item.partition("=")
        if not sep or not name:
            raise argparse.ArgumentTypeError(f"expected name=lo:hi:n, got {item!r}")
        if name in grid:
            raise argparse.ArgumentTypeError(f"parameter {name!r} given twice")
        grid[name] = _range(rng)
    return grid


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.floating):
        return _jsonable(float(value))
    return value


def _emit(out: TextIO, payload: dict):
    out.write(json.dumps(_jsonable(payload), indent=2) + "\n")


def _add_quadrature(p):
    g = p.add_argument_group("quadrature")
    g.add_argument("--quad-abs-tol", type=_number, default=_QUAD_DEFAULTS.abs_tol)
    g.add_argument("--quad-rel-tol", type=_number, default=_QUAD_DEFAULTS.rel_tol)
    g.add_argument("--quad-max-depth", type=_count, default=_QUAD_DEFAULTS.max_depth)
    g.add_argument("--tail-cut", type=_number, default=_QUAD_DEFAULTS.tail_cut)


def _add_root(p):
    g = p.add_argument_group("root finding")
    g.add_argument("--root-x-tol", type=_number, default=_ROOT_DEFAULTS.x_tol)
    g.add_argument("--root-max-iter", type=_count, default=_ROOT_DEFAULTS.max_iter)


def _quadrature(args) -> QuadratureConfig:
    return QuadratureConfig(args.quad_abs_tol, args.quad_rel_tol, args.quad_max_depth, args.tail_cut)


def _root(args) -> RootConfig:
    return RootConfig(args.root_x_tol, args.root_max_iter)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pastentropy", description="Past entropy of lifetime distributions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    kinds = [k.value for k in MeasureKind]

    p = sub.add_parser("eval", help="one measure at one time")
    p.add_argument("--dist", type=_distribution, required=True)
    p.add_argument("--measure", choices=kinds, required=True)
    p.add_argument("--t", type=_number)
    _add_quadrature(p)

    p = sub.add_parser("curve", help="a measure on a uniform time grid, written as CSV")
    p.add_argument("--dist", type=_distribution, required=True)
    p.add_argument("--measure", choices=kinds, required=True)
    p.add_argument("--t-min", type=_number, required=True)
    p.add_argument("--t-max", type=_number, required=True)
    p.add_argument("--points", type=_count, required=True)
    p.add_argument("--out", required=True)
    _add_quadrature(p)

    p = sub.add_parser("reconstruct", help="recover the cdf from a past-entropy curve CSV")
    p.add_argument("--in", dest="src", required=True)
    p.add_argument("--anchor-t", type=_number, required=True)
    p.add_argument("--anchor-F", dest="anchor_F", type=_number, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--branch", choices=["auto", "ascending", "descending"], default="auto")
    _add_root(p)

    p = sub.add_parser("compare", help="test the uniqueness premises and conclusion for two laws")
    p.add_argument("--dist-x", type=_distribution, required=True)
    p.add_argument("--dist-y", type=_distribution, required=True)
    p.add_argument("--t0", type=_number, required=True)
    p.add_argument("--premise-tol", type=_number, default=1e-6)
    p.add_argument("--separation-tol", type=_number, default=1e-2)
    _add_quadrature(p)

    p = sub.add_parser("probe", help="sweep a family pair for counterexample candidates")
    p.add_argument("--family-x", required=True)
    p.add_argument("--family-y", required=True)
    p.add_argument("--param-grid", type=_param_grid, required=True)
    p.add_argument("--t0-grid", type=_range, required=True)
    p.add_argument("--shape-grid", type=_range)
    p.add_argument("--out", required=True)
    p.add_argument("--premise-tol", type=_number, default=1e-6)
    p.add_argument("--separation-tol", type=_number, default=1e-2)
    _add_quadrature(p)

    p = sub.add_parser("estimate", help="spacings estimate of the past entropy from a sample")
    p.add_argument("--in", dest="src")
    p.add_argument("--t", type=_number, required=True)
    p.add_argument("--window", type=_count)
    p.add_argument("--synth", type=_distribution)
    p.add_argument("--n", type=_count)
    p.add_argument("--seed", type=_count)

    p = sub.add_parser("dist", help="pdf, cdf, survival, quantile or a seeded sample")
    p.add_argument("--dist", type=_distribution, required=True)
    p.add_argument("--fn", choices=["pdf", "cdf", "survival", "quantile", "sample"], required=True)
    p.add_argument("--x", type=_number)
    p.add_argument("--n", type=_count)
    p.add_argument("--seed", type=_count)

    p = sub.add_parser("invert", help="reversed hazard rates matching a past-entropy value and slope")
    p.add_argument("--hbar", type=_number, required=True)
    p.add_argument("--hprime", type=_number, required=True)
    _add_root(p)
    return parser


def _cmd_eval(args, out):
    kind = MeasureKind(args.measure)
    if args.t is None and kind is not MeasureKind.SHANNON:
        raise InputError(f"--t is required for measure {kind.value}")
    cfg = _quadrature(args)
    t = math.nan if args.t is None else args.t
    value = measure_value(args.dist, kind, t, cfg)
    _emit(out, {
        "command": "eval",
        "dist": args.dist.spec,
        "measure": kind.value,
        "t": args.t,
        "value": value,
        "quadrature": asdict(cfg),
    })


def _cmd_curve(args, out):
    cfg = _quadrature(args)
    curve = measure_curve(args.dist, args.measure, args.t_min, args.t_max, args.points, cfg)
    curve.to_csv(args.out)
    _emit(out, {
        "command": "curve",
        "dist": args.dist.spec,
        "measure": curve.kind.value,
        "t_min": args.t_min,
        "t_max": args.t_max,
        "points": len(curve),
        "out": args.out,
        "quadrature": asdict(cfg),
    })


def _cmd_reconstruct(args, out):
    try:
        curve = MeasureCurve.from_csv(args.src)
    except OSError as exc:
        raise InputError(f"cannot read {args.src}: {exc.strerror}") from None
    cfg = _root(args)
    result = chz.reconstruct_cdf(curve, (args.anchor_t, args.anchor_F), cfg, branch=args.branch)
    result.to_csv(args.out)
    regimes = {}
    for r in result.regimes:
        regimes[r.value] = regimes.get(r.value, 0) + 1
    _emit(out, {
        "command": "reconstruct",
        "in": args.src,
        "anchor": list(result.anchor),
        "branch": args.branch,
        "points": int(result.grid.size),
        "branch_switches": result.branch_switches,
        "max_selfcheck_residual": result.max_selfcheck_residual,
        "regimes": dict(sorted(regimes.items())),
        "out": args.out,
        "root": asdict(cfg),
    })


def _cmd_compare(args, out):
    cfg = _quadrature(args)
    verdict = chz.theorem_check(args.dist_x, args.dist_y, args.t0, args.premise_tol, args.separation_tol, cfg)
    _emit(out, {
        "command": "compare",
        "dist_x": args.dist_x.spec,
        "dist_y": args.dist_y.spec,
        "result": verdict.to_dict(),
        "premise_tol": args.premise_tol,
        "separation_tol": args.separation_tol,
        "quadrature": asdict(cfg),
    })


_PROBE_COLUMNS = ("dist_x", "dist_y", "t0", "cdf_gap", "entropy_gap", "mismatch", "conclusion_distance", "verdict")


def _cmd_probe(args, out):
    cfg = _quadrature(args)
    report = chz.uniqueness_probe(
        args.family_x, args.family_y, args.param_grid, args.t0_grid,
        args.premise_tol, args.separation_tol, cfg, shape_grid=args.shape_grid,
    )
    lines = [",".join(_PROBE_COLUMNS)]
    for c in report:
        v = c.verdict
        nums = (v.t0, v.cdf_gap, v.entropy_gap, v.mismatch, v.conclusion_distance)
        # distribution specs contain commas, so they are quoted
        lines.append(",".join([f'"{c.dist_x.spec}"', f'"{c.dist_y.spec}"'] + [format(x, ".17g") for x in nums] + [v.verdict.value]))
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    top = report.candidates[0] if report.candidates else None
    _emit(out, {
        "command": "probe",
        "family_x": args.family_x,
        "family_y": args.family_y,
        "cells": report.cells,
        "candidates": len(report),
        "cell_errors": len(report.errors),
        "top": None if top is None else {
            "dist_x": top.dist_x.spec,
            "dist_y": top.dist_y.spec,
            "result": top.verdict.to_dict(),
        },
        "out": args.out,
        "premise_tol": args.premise_tol,
        "separation_tol": args.separation_tol,
        "quadrature": asdict(cfg),
    })


def _cmd_estimate(args, out):
    synth = (args.synth, args.n, args.seed)
    if args.src is not None and any(s is not None for s in synth):
        raise InputError("give either --in or --synth/--n/--seed, not both")
    if args.src is not None:
        try:
            sample = Sample.from_csv(args.src)
        except OSError as exc:
            raise InputError(f"cannot read {args.src}: {exc.strerror}") from None
        source = {"in": args.src}
    elif all(s is not None for s in synth):
        sample = Sample(args.synth.sample(args.n, args.seed))
        source = {"synth": args.synth.spec, "n": args.n, "seed": args.seed}
    else:
        raise InputError("estimate needs --in, or all of --synth, --n and --seed")
    value = past_entropy_estimate(sample, args.t, args.window)
    k = int(np.count_nonzero(sample.values <= args.t))
    _emit(out, {
        "command": "estimate",
        **source,
        "t": args.t,
        "k": k,
        "window": math.isqrt(k) if args.window is None else args.window,
        "value": value,
    })


def _cmd_dist(args, out):
    d = args.dist
    payload = {"command": "dist", "dist": d.spec, "fn": args.fn}
    if args.fn == "sample":
        if args.n is None or args.seed is None:
            raise InputError("--fn sample needs --n and --seed")
        payload.update(n=args.n, seed=args.seed, values=d.sample(args.n, args.seed))
    else:
        if args.x is None:
            raise InputError(f"--fn {args.fn} needs --x")
        payload.update(x=args.x, value=getattr(d, args.fn)(args.x))
    _emit(out, payload)


def _cmd_invert(args, out):
    cfg = _root(args)
    res = chz.solve_reversed_hazard(args.hbar, args.hprime, cfg)
    _emit(out, {
        "command": "invert",
        "hbar": args.hbar,
        "hprime": args.hprime,
        "regime": res.regime.value,
        "roots": list(res.roots),
        "residuals": list(res.residuals),
        "root": asdict(cfg),
    })


_COMMANDS = {
    "eval": _cmd_eval,
    "curve": _cmd_curve,
    "reconstruct": _cmd_reconstruct,
    "compare": _cmd_compare,
    "probe": _cmd_probe,
    "estimate": _cmd_estimate,
    "dist": _cmd_dist,
    "invert": _cmd_invert,
}


def run(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Execute one command; returns the exit status instead of exiting."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = _build_parser()
    try:
        # --help prints through argparse and exits
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(list(argv))
        _COMMANDS[args.command](args, stdout)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except _UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_INPUT
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except NumericalError as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))
