"""Numerical kernels shared by the measures and the inversion code.

``integrate`` is a globally adaptive 7/15-point Gauss-Kronrod scheme. All
Kronrod nodes are interior, so integrands that blow up logarithmically (or as
an integrable power) at an end point are never evaluated there. Panels live
in a smoothstep-substituted variable, which flattens end-point singularities
before the adaptive refinement sees them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AccuracyError, BracketError, DomainError

__all__ = [
    "QuadratureConfig",
    "RootConfig",
    "integrate",
    "find_root",
    "central_diff",
]

# Kronrod abscissae (descending, last is the centre) and weights; Gauss
# weights belong to the odd-indexed Kronrod abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes on [-1, 1]: negatives, centre, positives
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GW = np.zeros(15)
_GW[1:7:2] = _WG[:3]
_GW[7] = _WG[3]
_GW[9:14:2] = _WG[:3][::-1]
# nodes of both halves of [-1, 1], each half scaled to unit half-width
_HALVES = np.concatenate([_NODES - 1.0, _NODES + 1.0])

_EPS = float(np.finfo(float).eps)
_MAX_PANELS = 20000


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 50
    tail_cut: float = 1e-12

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")
        if not 0 < self.tail_cut <= 1e-6:
            raise DomainError("tail_cut must lie in (0, 1e-6]")


@dataclass(frozen=True)
class RootConfig:
    x_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.x_tol > 0:
            raise DomainError("x_tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")


class _Panels:
    """Evaluates GK15 on panels of the substituted variable s in [0, 1].

    Panels never straddle s = 1/2, so each one measures its nodes from the
    nearer end of [a, b] and keeps relative precision there.
    """

    def __init__(self, f, a, b):
        self.f = f
        self.a = a
        self.b = b
        self.width = b - a
        self.evaluations = 0

    def rule(self, s0, s1, halves=False):
        """GK15 on ``[s0, s1]``, or on each of its halves when ``halves`` is
        set; returns lists of values and error estimates."""
        upper = s1 > 0.5
        if halves:
            h = 0.25 * (s1 - s0)
            template = _HALVES
        else:
            h = 0.5 * (s1 - s0)
            template = _NODES
        centre = 0.5 * (s0 + s1)
        # distance in s from the nearer end of [0, 1]
        near = (1.0 - centre) - h * template if upper else centre + h * template
        # x = a + (b - a) S(s) with S(s) = 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7,
        # S'(s) = 140 s^3 (1 - s)^3; the constant 140 (b - a) h is applied last
        c = near * near * near
        frac = (c * near) * (35.0 + near * (-84.0 + near * (70.0 - 20.0 * near)))
        x = self.b - self.width * frac if upper else self.a + self.width * frac
        fx = np.asarray(self.f(x), dtype=float)
        if fx.shape != x.shape:
            fx = np.broadcast_to(fx, x.shape)
        vals = (fx * (c * (1.0 - near) ** 3)).reshape(-1, 15)
        self.evaluations += vals.shape[0]
        resk = vals @ _KW
        if not np.all(np.isfinite(resk)):
            bad = x[~np.isfinite(fx)]
            raise DomainError(f"integrand is not finite at x={bad[0] if bad.size else x[0]!r}")
        resg = vals @ _GW
        resasc = np.abs(vals - 0.5 * resk[:, None]) @ _KW
        resabs = np.abs(vals) @ _KW
        scale = 140.0 * self.width * h
        values, errs = [], []
        for k, g, asc, ab in zip(resk.tolist(), resg.tolist(), resasc.tolist(), resabs.tolist()):
            err = abs(k - g) * scale
            asc *= scale
            if asc != 0.0 and err != 0.0:
                err = asc * min(1.0, (200.0 * err / asc) ** 1.5)
            values.append(k * scale)
            errs.append(max(50.0 * _EPS * ab * scale, err))
        return values, errs


def _truncation_point(a, tail, tail_cut):
    step = 1.0
    prev = a
    x = a + step
    while tail(x) > tail_cut:
        prev = x
        step *= 2.0
        x = a + step
        if not math.isfinite(x):
            raise DomainError("tail mass never falls below tail_cut")
    if prev == a:
        return x
    return find_root(lambda y: tail(y) - tail_cut, prev, x, RootConfig(x_tol=1e-10))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    tail: Optional[Callable[[float], float]] = None,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` and return ``(value, err_est)``.

    ``f`` is called with 1-D arrays of nodes and must be vectorised. An
    infinite ``b`` needs ``tail``, the mass left beyond a point; the range is
    cut where that mass drops to ``cfg.tail_cut``.

    Raises ``AccuracyError`` (carrying the partial value) when the depth
    budget runs out before the tolerance is met, and ``DomainError`` when the
    integrand is not finite at a node.
    """
    if math.isinf(b):
        if tail is None:
            raise DomainError("infinite upper limit needs a tail-mass function")
        b = _truncation_point(a, tail, cfg.tail_cut)
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"need finite a < b, got a={a!r}, b={b!r}")

    panels = _Panels(f, float(a), float(b))
    # heap of (-err, s0, s1, depth, value, err); depth 1 after the first split
    (v1,), (e1,) = panels.rule(0.0, 0.5)
    (v2,), (e2,) = panels.rule(0.5, 1.0)
    heap = [(-e1, 0.0, 0.5, 1, v1, e1), (-e2, 0.5, 1.0, 1, v2, e2)]
    heapq.heapify(heap)
    frozen = []
    total, errsum = heap[0][4] + heap[1][4], heap[0][5] + heap[1][5]
    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if errsum <= tol:
            break
        if not heap or panels.evaluations > _MAX_PANELS:
            total = math.fsum(p[4] for p in heap + frozen)
            raise AccuracyError(
                f"quadrature on [{a}, {b}] stopped with error estimate "
                f"{errsum:.3g} above tolerance {tol:.3g}",
                partial=total,
                err_est=errsum,
            )
        item = heapq.heappop(heap)
        _, s0, s1, depth, v, e = item
        if depth >= cfg.max_depth:
            frozen.append(item)
            continue
        mid = 0.5 * (s0 + s1)
        (v1, v2), (e1, e2) = panels.rule(s0, s1, halves=True)
        heapq.heappush(heap, (-e1, s0, mid, depth + 1, v1, e1))
        heapq.heappush(heap, (-e2, mid, s1, depth + 1, v2, e2))
        total += v1 + v2 - v
        errsum += e1 + e2 - e
    live = heap + frozen
    return math.fsum(p[4] for p in live), math.fsum(p[5] for p in live)


def find_root(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: RootConfig = RootConfig(),
) -> float:
    """Bracketed root of ``g`` on ``[lo, hi]``.

    Secant steps through the two latest iterates, kept inside the bracket;
    a bisection replaces the secant point when it escapes the bracket or
    when two steps have not halved the bracket. Steps are never shorter
    than half the tolerance, so the bracket collapses around a converged
    secant sequence. Returns the bracket end with the smaller residual once
    the bracket is narrower than ``x_tol * max(1, |x|)``.
    """
    lo, hi = float(lo), float(hi)
    if lo > hi:
        lo, hi = hi, lo
    glo, ghi = float(g(lo)), float(g(hi))
    if math.isnan(glo) or math.isnan(ghi):
        raise DomainError("root function is NaN at a bracket end")
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: g={glo:.3g}, {ghi:.3g}")

    # latest iterate last
    (x0, g0), (x1, g1) = sorted([(lo, glo), (hi, ghi)], key=lambda p: -abs(p[1]))
    widths = [hi - lo]
    for _ in range(cfg.max_iter):
        best = lo if abs(glo) < abs(ghi) else hi
        tol = cfg.x_tol * max(1.0, abs(best))
        if hi - lo <= tol:
            return best
        x = x1 - g1 * (x1 - x0) / (g1 - g0) if g1 != g0 else math.nan
        stalled = len(widths) > 2 and widths[-1] > 0.5 * widths[-3]
        if stalled or not lo < x < hi:
            x = 0.5 * (lo + hi)
        elif abs(x - x1) < 0.5 * tol:
            x = x1 + math.copysign(0.5 * tol, 0.5 * (lo + hi) - x1)
        if not lo < x < hi:
            # bracket is down to adjacent floats
            return best
        gx = float(g(x))
        if math.isnan(gx):
            raise DomainError(f"root function is NaN at x={x!r}")
        if gx == 0.0:
            return x
        if (gx > 0) == (glo > 0):
            lo, glo = x, gx
        else:
            hi, ghi = x, gx
        x0, g0, x1, g1 = x1, g1, x, gx
        widths.append(hi - lo)
    raise AccuracyError(
        f"root bracket [{lo}, {hi}] not resolved in {cfg.max_iter} iterations",
        partial=(lo, hi),
        err_est=hi - lo,
    )


def central_diff(f: Callable[[float], float], t: float, h: float) -> float:
    if not h > 0:
        raise DomainError("step h must be positive")
    return (f(t + h) - f(t - h)) / (2.0 * h)

