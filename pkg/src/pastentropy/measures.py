"""Entropy functionals of lifetime laws and the reversed hazard rate.

Past entropy has three independent routes that must agree:

* ``past_entropy_direct``: differential entropy of the density ``f / F(t)``
  on ``(0, t)``;
* ``past_entropy_pit``: the same quantity after the substitution
  ``u = F(x)``, integrated over ``(0, F(t))`` through the quantile function;
* ``past_entropy_condexp``: ``1 - E[log phi(X) | X < t]`` with ``phi`` the
  reversed hazard rate.

Logarithms are natural (nats). Integrands are built from the log-density so
that tails and near-zero densities do not underflow into ``0 * log 0``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np

from .distributions import Distribution
from .errors import DegenerateConditionError, DomainError, PastEntropyError
from .numerics import QuadratureConfig, integrate

__all__ = [
    "MeasureKind",
    "MeasureCurve",
    "shannon_entropy",
    "residual_entropy",
    "past_entropy_direct",
    "past_entropy_pit",
    "past_entropy_condexp",
    "reversed_hazard",
    "measure_value",
    "measure_curve",
]

DEFAULT_QUADRATURE = QuadratureConfig()


class MeasureKind(str, Enum):
    SHANNON = "shannon"
    RESIDUAL = "residual"
    PAST_DIRECT = "past_direct"
    PAST_PIT = "past_pit"
    PAST_CONDEXP = "past_condexp"
    REVERSED_HAZARD = "reversed_hazard"


def _plogp(logp):
    """``p log p`` from ``log p``, with the limit 0 where ``p`` vanishes."""
    dead = np.isneginf(logp)
    return np.where(dead, 0.0, np.exp(logp) * np.where(dead, 0.0, logp))


def _tail(dist, log_norm=0.0):
    return lambda x: math.exp(float(dist.logsf(x)) - log_norm)


def shannon_entropy(dist: Distribution, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    s = dist.support

    def integrand(x):
        return -_plogp(dist._logpdf(x))

    value, _ = integrate(integrand, s.lower, s.upper, cfg, tail=_tail(dist))
    return value


def residual_entropy(dist: Distribution, t: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Entropy of the remaining lifetime ``X - t`` given ``X > t``."""
    s = dist.support
    t = max(float(t), s.lower)
    log_surv = float(dist.logsf(t))
    if not math.exp(log_surv) > cfg.tail_cut:
        raise DegenerateConditionError(f"survival probability at t={t!r} is below {cfg.tail_cut:g}")

    def integrand(x):
        return -_plogp(dist._logpdf(x) - log_surv)

    value, _ = integrate(integrand, t, s.upper, cfg, tail=_tail(dist, log_surv))
    return value


def _past_setup(dist, t, cfg):
    """Validate ``t`` and return ``log F(t)``; ``None`` means ``t`` is infinite."""
    s = dist.support
    t = float(t)
    if math.isnan(t) or t > s.upper:
        raise DomainError(f"t={t!r} lies outside the support [{s.lower}, {s.upper}]")
    if math.isinf(t):
        return None
    log_cdf = float(dist.logcdf(t))
    if not math.exp(log_cdf) > cfg.tail_cut:
        raise DegenerateConditionError(f"F(t) at t={t!r} is below {cfg.tail_cut:g}")
    return log_cdf


def past_entropy_direct(dist: Distribution, t: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Entropy of the lifetime given failure before ``t``, from its density."""
    log_cdf = _past_setup(dist, t, cfg)
    if log_cdf is None:
        return shannon_entropy(dist, cfg)

    def integrand(x):
        return -_plogp(dist._logpdf(x) - log_cdf)

    value, _ = integrate(integrand, dist.support.lower, float(t), cfg)
    return value


def past_entropy_pit(dist: Distribution, t: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Past entropy through the probability integral transform ``u = F(x)``:

        log F(t) - (1/F(t)) * integral_0^F(t) log f(F^-1(u)) du
    """
    log_cdf = _past_setup(dist, t, cfg)
    if log_cdf is None:
        return shannon_entropy(dist, cfg)
    v = math.exp(log_cdf)
    if not dist.support.bounded:
        # quantile nodes must stay finite; the cut mass is at most tail_cut
        v = min(v, 1.0 - cfg.tail_cut)

    def integrand(u):
        return dist._logpdf(dist._ppf(u))

    value, _ = integrate(integrand, 0.0, v, cfg)
    return log_cdf - value / math.exp(log_cdf)


def past_entropy_condexp(dist: Distribution, t: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Past entropy as one minus the conditional mean of ``log phi(X)``."""
    log_cdf = _past_setup(dist, t, cfg)
    if log_cdf is None:
        return shannon_entropy(dist, cfg)

    def integrand(x):
        log_f = dist._logpdf(x)
        log_phi = log_f - dist._logcdf(x)
        w = np.exp(log_f - log_cdf)
        return np.where(w == 0.0, 0.0, w * log_phi)

    value, _ = integrate(integrand, dist.support.lower, float(t), cfg)
    return 1.0 - value


def reversed_hazard(dist: Distribution, t: float) -> float:
    """``f(t) / F(t)``, the derivative of ``log F``."""
    s = dist.support
    t = float(t)
    if math.isnan(t) or t > s.upper:
        raise DomainError(f"t={t!r} lies outside the support [{s.lower}, {s.upper}]")
    log_cdf = float(dist.logcdf(t))
    if math.isinf(log_cdf):
        raise DegenerateConditionError(f"F(t) = 0 at t={t!r}")
    return math.exp(float(dist.logpdf(t)) - log_cdf)


def measure_value(
    dist: Distribution,
    kind: Union[MeasureKind, str],
    t: float = math.nan,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    kind = MeasureKind(kind)
    if kind is MeasureKind.SHANNON:
        return shannon_entropy(dist, cfg)
    if kind is MeasureKind.REVERSED_HAZARD:
        return reversed_hazard(dist, t)
    return _TIMED[kind](dist, t, cfg)


_TIMED = {
    MeasureKind.RESIDUAL: residual_entropy,
    MeasureKind.PAST_DIRECT: past_entropy_direct,
    MeasureKind.PAST_PIT: past_entropy_pit,
    MeasureKind.PAST_CONDEXP: past_entropy_condexp,
}


@dataclass(frozen=True)
class MeasureCurve:
    kind: MeasureKind
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise DomainError("grid and values must be 1-D and of equal length")
        if grid.size and np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("curve values must be finite")
        object.__setattr__(self, "kind", MeasureKind(self.kind))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.size

    def to_csv(self, path=None) -> str:
        """Write ``t,value`` rows with 17 significant digits; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(self.grid, self.values):
            w.writerow([format(t, ".17g"), format(v, ".17g")])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, kind=MeasureKind.PAST_DIRECT) -> "MeasureCurve":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["t", "value"]:
                raise DomainError(f"{path}: expected header 't,value', got {reader.fieldnames}")
            try:
                rows = [(float(r["t"]), float(r["value"])) for r in reader]
            except (TypeError, ValueError) as exc:
                raise DomainError(f"{path}: unreadable row ({exc})") from None
        grid, values = zip(*rows) if rows else ((), ())
        return cls(kind, np.array(grid), np.array(values))


def measure_curve(
    dist: Distribution,
    kind: Union[MeasureKind, str],
    t_min: float,
    t_max: float,
    points: int,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> MeasureCurve:
    """Evaluate one measure on ``points`` equally spaced times."""
    kind = MeasureKind(kind)
    s = dist.support
    if not s.lower < t_min < t_max <= s.upper:
        raise DomainError(f"need {s.lower} < t_min < t_max <= {s.upper}, got [{t_min}, {t_max}]")
    if points < 2:
        raise DomainError("a curve needs at least 2 points")
    grid = np.linspace(t_min, t_max, points)
    values = np.empty(points)
    for i, t in enumerate(grid):
        try:
            values[i] = measure_value(dist, kind, t, cfg)
        except PastEntropyError as exc:
            exc.t = float(t)
            exc.args = (f"at t={t!r}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
    return MeasureCurve(kind, grid, values)
