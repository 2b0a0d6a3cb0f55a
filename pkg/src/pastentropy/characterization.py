"""Recovering a distribution from its past-entropy curve, and probing the
single-point uniqueness claim.

Differentiating the past entropy ``H(t)`` gives

    H'(t) = phi(t) * (1 - H(t) - log phi(t)),

with ``phi = f / F`` the reversed hazard rate. For fixed ``H`` the right side
``g(phi)`` rises from 0 to its peak ``exp(-H)`` at ``phi = exp(-H)`` and then
falls through zero at ``phi = exp(1 - H)``, so a slope ``H'`` is matched by
none, one or two values of ``phi``. ``reconstruct_cdf`` picks one root per
grid point and integrates ``phi`` into ``log F``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .distributions import FAMILIES, Distribution
from .errors import (
    DegenerateConditionError,
    DomainError,
    InconsistentCurveError,
    PastEntropyError,
    PreconditionError,
    ReconstructionError,
)
from .measures import DEFAULT_QUADRATURE, MeasureCurve, MeasureKind, past_entropy_direct, past_entropy_pit
from .numerics import QuadratureConfig, RootConfig, find_root, integrate

__all__ = [
    "Regime",
    "RootSolveOutcome",
    "ReconstructionResult",
    "TheoremVerdict",
    "ProbeCandidate",
    "ProbeReport",
    "ode_rhs",
    "solve_reversed_hazard",
    "reconstruct_cdf",
    "mismatch_integral",
    "theorem_check",
    "uniqueness_probe",
]

TANGENT_RTOL = 1e-8
CONCLUSION_POINTS = 256
TRIAL_STEPS = 3


class Regime(str, Enum):
    NO_ROOT = "no_root"
    TANGENT = "tangent"
    TWO_ROOTS = "two_roots"
    SINGLE_ROOT_NONPOSITIVE_SLOPE = "single_root_nonpositive_slope"


@dataclass(frozen=True)
class RootSolveOutcome:
    roots: tuple
    regime: Regime
    residuals: tuple


def ode_rhs(hbar: float, phi: float) -> float:
    """Slope of the past entropy given its value and the reversed hazard rate."""
    if not phi > 0:
        raise DomainError(f"reversed hazard rate must be positive, got {phi!r}")
    return phi * (1.0 - hbar - math.log(phi))


def solve_reversed_hazard(hbar: float, hprime: float, cfg: RootConfig = RootConfig()) -> RootSolveOutcome:
    """All ``phi > 0`` with ``ode_rhs(hbar, phi) == hprime``.

    Roots are located in ``log phi``, where both branches are well scaled.
    """
    if not (math.isfinite(hbar) and math.isfinite(hprime)):
        raise DomainError("hbar and hprime must be finite")
    peak = math.exp(-hbar)  # both the maximiser and the maximum of g

    def g(s):
        return math.exp(s) * (1.0 - hbar - s) - hprime

    def outcome(logs, regime):
        roots = tuple(sorted(math.exp(s) for s in logs))
        return RootSolveOutcome(roots, regime, tuple(abs(ode_rhs(hbar, r) - hprime) for r in roots))

    if abs(hprime - peak) <= TANGENT_RTOL * peak:
        return outcome([-hbar], Regime.TANGENT)
    if hprime > peak:
        return RootSolveOutcome((), Regime.NO_ROOT, ())
    if hprime <= 0:
        lo = 1.0 - hbar
        step = 1.0
        while g(lo + step) > 0:
            step *= 2.0
        return outcome([find_root(g, lo, lo + step, cfg)], Regime.SINGLE_ROOT_NONPOSITIVE_SLOPE)
    step = 1.0
    while g(-hbar - step) > 0:
        step *= 2.0
    ascending = find_root(g, -hbar - step, -hbar, cfg)
    descending = find_root(g, -hbar, 1.0 - hbar, cfg)
    return outcome([ascending, descending], Regime.TWO_ROOTS)


@dataclass(frozen=True)
class ReconstructionResult:
    grid: np.ndarray
    phi: np.ndarray
    cdf: np.ndarray
    anchor: tuple
    branch_switches: int
    max_selfcheck_residual: float
    regimes: tuple = field(default=(), repr=False)

    def to_csv(self, path=None) -> str:
        lines = ["t,phi,cdf"]
        lines += [f"{t:.17g},{p:.17g},{c:.17g}" for t, p, c in zip(self.grid, self.phi, self.cdf)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _heun(rhs, t, y0, phi):
    """Integrate ``y' = rhs(y, phi(t))`` forward along the grid ``t`` with
    ``phi`` known at the nodes (explicit trapezoid)."""
    y = np.empty(len(t))
    y[0] = y0
    for i in range(len(t) - 1):
        h = t[i + 1] - t[i]
        k1 = rhs(y[i], phi[i])
        k2 = rhs(y[i] + h * k1, phi[i + 1])
        y[i + 1] = y[i] + 0.5 * h * (k1 + k2)
    return y


def _slope_slack(t, h):
    """Finite-difference slope and a truncation allowance for it.

    The slope is second order (central inside, one-sided at the ends). Its
    truncation error is estimated by comparing with a five-point fourth-order
    stencil; the allowance is twice that gap. Slopes within the allowance of
    the peak of ``g`` are treated as tangent.
    """
    d1 = np.gradient(h, t, edge_order=2)
    n = t.size
    if n < 5:
        return d1, np.zeros(n)
    start = np.clip(np.arange(n) - 2, 0, n - 5)
    idx = start[:, None] + np.arange(5)
    scale = np.gradient(t)[:, None]
    offsets = (t[idx] - t[:, None]) / scale
    # weights w with sum_j w_j offsets_j^k = [k == 1], k = 0..4
    vander = offsets[:, None, :] ** np.arange(5)[None, :, None]
    rhs = np.zeros((n, 5, 1))
    rhs[:, 1, 0] = 1.0
    weights = np.linalg.solve(vander, rhs)[..., 0]
    d4 = np.sum(weights * h[idx], axis=1) / scale[:, 0]
    return d1, 2.0 * np.abs(d1 - d4)


def _continue(outcomes, t, start_index, start_phi, indices):
    """Follow one root from ``start_index`` through ``indices``.

    Each point takes the root nearest (in log) to a linear extrapolation of
    the last two accepted values. Where the true rate passes through the
    tangency the two root curves cross, and extrapolation keeps to the
    straight continuation instead of bouncing back.
    """
    phi = {start_index: start_phi}
    hist = [(t[start_index], math.log(start_phi))]
    for i in indices:
        if len(hist) >= 2:
            (t0, y0), (t1, y1) = hist[-2:]
            guess = y1 + (y1 - y0) * (t[i] - t1) / (t1 - t0)
        else:
            guess = hist[-1][1]
        pick = min(outcomes[i].roots, key=lambda r: abs(math.log(r) - guess))
        phi[i] = pick
        hist.append((t[i], math.log(pick)))
    return phi


def reconstruct_cdf(
    curve: MeasureCurve,
    anchor: tuple,
    cfg: RootConfig = RootConfig(),
    branch: str = "auto",
) -> ReconstructionResult:
    """Recover the reversed hazard rate and the cdf from a past-entropy curve.

    ``anchor = (t_a, F_a)`` pins the cdf at one grid time. Where the slope
    admits two reversed hazard rates, the anchor point chooses between them:
    ``branch="auto"`` runs the self-consistency trial, ``"ascending"`` and
    ``"descending"`` force the smaller or larger root. Elsewhere each point
    follows its branch by extrapolating ``log phi`` from the last two points.
    """
    if curve.kind not in (MeasureKind.PAST_DIRECT, MeasureKind.PAST_PIT, MeasureKind.PAST_CONDEXP):
        raise PreconditionError(f"reconstruction needs a past-entropy curve, got {curve.kind.value}")
    if len(curve) < 5:
        raise PreconditionError(f"reconstruction needs at least 5 grid points, got {len(curve)}")
    if branch not in ("auto", "ascending", "descending"):
        raise PreconditionError(f"unknown branch rule {branch!r}")
    t, h = curve.grid, curve.values
    t_a, F_a = float(anchor[0]), float(anchor[1])
    if not 0 < F_a <= 1:
        raise PreconditionError(f"anchor probability must lie in (0, 1], got {F_a!r}")
    hits = np.flatnonzero(np.isclose(t, t_a, rtol=1e-12, atol=0.0))
    if hits.size != 1:
        raise PreconditionError(f"anchor time {t_a!r} is not a grid point")
    a = int(hits[0])

    slope, slack = _slope_slack(t, h)
    outcomes = []
    for ti, hi, si, ei in zip(t, h, slope, slack):
        peak = math.exp(-hi)
        if abs(si - peak) <= ei:
            si = peak
        oc = solve_reversed_hazard(float(hi), float(si), cfg)
        if oc.regime is Regime.NO_ROOT:
            raise InconsistentCurveError(
                f"no reversed hazard rate matches the curve at t={ti!r} "
                f"(slope {si:.6g} exceeds the attainable {peak:.6g})",
                t=float(ti),
            )
        outcomes.append(oc)

    n = len(t)
    left = list(range(a - 1, -1, -1))
    right = list(range(a + 1, n))
    roots_a = outcomes[a].roots
    if len(roots_a) == 1:
        phi_a = roots_a[0]
    elif branch == "ascending":
        phi_a = roots_a[0]
    elif branch == "descending":
        phi_a = roots_a[1]
    else:
        phi_a = _branch_trial(t, h, outcomes, a, left, right)

    phi_map = _continue(outcomes, t, a, phi_a, left)
    phi_map.update(_continue(outcomes, t, a, phi_a, right))
    phi = np.array([phi_map[i] for i in range(n)])

    log_cdf = np.empty(n)
    log_cdf[a] = math.log(F_a)
    for i in right:
        log_cdf[i] = log_cdf[i - 1] + 0.5 * (phi[i - 1] + phi[i]) * (t[i] - t[i - 1])
    for i in left:
        log_cdf[i] = log_cdf[i + 1] - 0.5 * (phi[i] + phi[i + 1]) * (t[i + 1] - t[i])
    cdf = np.exp(log_cdf)
    cdf[a] = F_a
    if np.any(np.diff(cdf) < 0):
        raise ReconstructionError("recovered cdf is not monotone")
    if np.any(cdf > 1.0 + 1e-9):
        bad = t[np.argmax(cdf > 1.0 + 1e-9)]
        raise ReconstructionError(f"recovered cdf exceeds 1 at t={bad!r}; anchor inconsistent with curve")
    cdf = np.minimum(cdf, 1.0)

    regimes = tuple(oc.regime for oc in outcomes)
    switches = sum(r0 is not r1 for r0, r1 in zip(regimes, regimes[1:]))
    recheck = _heun(ode_rhs, t, h[0], phi)
    return ReconstructionResult(
        grid=t.copy(),
        phi=phi,
        cdf=cdf,
        anchor=(t_a, F_a),
        branch_switches=switches,
        max_selfcheck_residual=float(np.max(np.abs(recheck - h))),
        regimes=regimes,
    )


def _branch_trial(t, h, outcomes, a, left, right):
    """Pick the anchor root whose short continuation re-integrates closest to
    the input curve; near-ties go to the descending (larger) root."""
    if len(left) >= TRIAL_STEPS:
        window = sorted(left[:TRIAL_STEPS] + [a])
        steps = left[:TRIAL_STEPS]
    else:
        window = sorted([a] + right[:TRIAL_STEPS])
        steps = right[:TRIAL_STEPS]
    scores = []
    for root in outcomes[a].roots:
        phi_map = _continue(outcomes, t, a, root, steps)
        phi = np.array([phi_map[i] for i in window])
        recheck = _heun(ode_rhs, t[window], h[window[0]], phi)
        scores.append(float(np.max(np.abs(recheck - h[window]))))
    ascending, descending = scores
    if ascending < 0.5 * descending:
        return outcomes[a].roots[0]
    return outcomes[a].roots[1]


def mismatch_integral(
    dist_x: Distribution,
    dist_y: Distribution,
    v: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Integral over ``(0, v)`` of ``log[f(F^-1(u)) / g(G^-1(u))]``."""
    if not 0 < v <= 1:
        raise DomainError(f"v must lie in (0, 1], got {v!r}")
    if not (dist_x.support.bounded and dist_y.support.bounded):
        v = min(v, 1.0 - cfg.tail_cut)

    def integrand(u):
        return dist_x._logpdf(dist_x._ppf(u)) - dist_y._logpdf(dist_y._ppf(u))

    value, _ = integrate(integrand, 0.0, v, cfg)
    return value


class Verdict(str, Enum):
    PREMISES_FAIL = "premises_fail"
    CONSISTENT = "consistent"
    COUNTEREXAMPLE_CANDIDATE = "counterexample_candidate"


@dataclass(frozen=True)
class TheoremVerdict:
    t0: float
    cdf_gap: float
    entropy_gap: float
    mismatch: float
    conclusion_distance: float
    verdict: Verdict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def theorem_check(
    dist_x: Distribution,
    dist_y: Distribution,
    t0: float,
    premise_tol: float = 1e-6,
    separation_tol: float = 1e-2,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> TheoremVerdict:
    """Test the premises (equal cdf and equal past entropy at ``t0``) and the
    conclusion (equal laws, judged by the cdf gap on ``(0, t0]``)."""
    t0 = float(t0)
    for d in (dist_x, dist_y):
        if not 0 < t0 <= d.support.upper:
            raise DomainError(f"t0={t0!r} outside the support of {d}")
    F, G = float(dist_x.cdf(t0)), float(dist_y.cdf(t0))
    if F <= 0 or G <= 0:
        raise DegenerateConditionError(f"F(t0)={F!r}, G(t0)={G!r}: both must be positive")
    cdf_gap = abs(F - G)
    entropy_gap = abs(past_entropy_direct(dist_x, t0, cfg) - past_entropy_direct(dist_y, t0, cfg))
    mismatch = mismatch_integral(dist_x, dist_y, F, cfg)
    grid = t0 * np.arange(1, CONCLUSION_POINTS + 1) / CONCLUSION_POINTS
    distance = float(np.max(np.abs(dist_x.cdf(grid) - dist_y.cdf(grid))))
    if cdf_gap > premise_tol or entropy_gap > premise_tol:
        verdict = Verdict.PREMISES_FAIL
    elif distance > separation_tol:
        verdict = Verdict.COUNTEREXAMPLE_CANDIDATE
    else:
        verdict = Verdict.CONSISTENT
    return TheoremVerdict(t0, cdf_gap, entropy_gap, mismatch, distance, verdict)


# -- probe -------------------------------------------------------------------

DEFAULT_SHAPE_SCAN = tuple(np.geomspace(0.1, 10.0, 25))
_SCAN_QUADRATURE = QuadratureConfig(abs_tol=1e-6, rel_tol=1e-6)
# shape resolution far below what the 1e-6 premise tolerance can see
_REFINE = RootConfig(x_tol=1e-9)
_ZERO_BAND = 1e-5


@dataclass(frozen=True)
class ProbeCandidate:
    dist_x: Distribution
    dist_y: Distribution
    verdict: TheoremVerdict


@dataclass
class ProbeReport:
    candidates: list
    cells: int
    errors: list

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)


def _matched_scale(family, shape, t0, v):
    """Scale putting mass ``v`` below ``t0`` for the given shape."""
    unit = family.from_shape_scale(shape, 1.0)
    if v >= 1.0:
        if not unit.support.bounded:
            raise DegenerateConditionError("F(t0) = 1 cannot be matched by an unbounded family")
        return t0 / unit.support.upper
    return t0 / float(unit.quantile(v))


def _premise_partners(x, family_y, t0, shapes, cfg):
    """Members of ``family_y`` with G(t0) = F(t0) and the same past entropy at
    ``t0`` as ``x``: the scale is fixed by the cdf condition, the shape by a
    scan for sign changes of the entropy difference, refined by root finding.

    The search runs on the u-space route, which stays cheap when the density
    is singular at the origin; ``theorem_check`` re-tests the premises on the
    direct route. Within one family, ``x``'s own shape is a known root: it
    joins the scan as an exact zero and is left out of the result."""
    v = float(x.cdf(t0))
    target = past_entropy_pit(x, t0, cfg)
    if family_y.shape_name is None:
        return [family_y.from_shape_scale(None, _matched_scale(family_y, None, t0, v))]

    def member(k):
        return family_y.from_shape_scale(k, _matched_scale(family_y, k, t0, v))

    def gap(k, qcfg=cfg):
        return past_entropy_pit(member(k), t0, qcfg) - target

    own = x.shape_param if type(x) is family_y else None
    scan = [(k, gap(k, _SCAN_QUADRATURE)) for k in shapes if k != own]
    if own is not None:
        scan = sorted(scan + [(own, 0.0)])
    # a node inside the scan's own noise is taken as a root; its sign means nothing
    band = _ZERO_BAND * max(1.0, abs(target))
    found = [k for k, r in scan if abs(r) <= band and k != own]
    for (k0, r0), (k1, r1) in zip(scan, scan[1:]):
        if abs(r0) > band and abs(r1) > band and (r0 > 0) != (r1 > 0):
            found.append(find_root(gap, k0, k1, _REFINE))
    found.sort()
    return [member(k) for k in found]


def uniqueness_probe(
    family_x: str,
    family_y: str,
    param_grid: Mapping[str, Sequence[float]],
    t0_grid: Sequence[float],
    premise_tol: float = 1e-6,
    separation_tol: float = 1e-2,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    shape_grid: Optional[Sequence[float]] = None,
) -> ProbeReport:
    """Sweep ``family_x`` parameters and ``t0`` and look for members of
    ``family_y`` meeting both premises at ``t0`` while differing in law.

    ``param_grid`` maps every parameter of ``family_x`` to its grid values.
    The partner's shape is scanned over ``shape_grid``, or over the grid given
    for ``family_y``'s shape parameter, or a default log-spaced range. Cells
    that raise are recorded in ``ProbeReport.errors`` and skipped.
    """
    try:
        cls_x, cls_y = FAMILIES[family_x], FAMILIES[family_y]
    except KeyError as exc:
        raise PreconditionError(f"unknown family {exc.args[0]!r}") from None
    names = [f.name for f in fields(cls_x)]
    if set(param_grid) - set(names) - {cls_y.shape_name}:
        raise PreconditionError(f"unexpected grid parameters {sorted(set(param_grid) - set(names))}")
    missing = [n for n in names if n not in param_grid]
    if missing:
        raise PreconditionError(f"{family_x} grid lacks parameters {missing}")
    axes = [np.asarray(param_grid[n], dtype=float) for n in names]
    t0s = np.asarray(t0_grid, dtype=float)
    if t0s.size == 0 or any(ax.size == 0 for ax in axes):
        raise PreconditionError("probe grids must be nonempty")
    if shape_grid is None:
        shape_grid = param_grid.get(cls_y.shape_name, DEFAULT_SHAPE_SCAN) if cls_y.shape_name else ()
    shapes = sorted(float(k) for k in shape_grid)

    candidates, errors, cells = [], [], 0
    for values in itertools.product(*axes):
        x = cls_x(**dict(zip(names, (float(v) for v in values))))
        for t0 in t0s:
            cells += 1
            try:
                for y in _premise_partners(x, cls_y, float(t0), shapes, cfg):
                    if y == x:
                        continue
                    verdict = theorem_check(x, y, float(t0), premise_tol, separation_tol, cfg)
                    if verdict.verdict is Verdict.COUNTEREXAMPLE_CANDIDATE:
                        candidates.append(ProbeCandidate(x, y, verdict))
            except PastEntropyError as exc:
                errors.append((x.spec, float(t0), str(exc)))
    candidates.sort(key=lambda c: -c.verdict.conclusion_distance)
    return ProbeReport(candidates, cells, errors)
