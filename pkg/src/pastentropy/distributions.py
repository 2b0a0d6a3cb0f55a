"""Parametric lifetime distributions with closed-form pdf, cdf and quantile.

Every family is a shape/scale family on ``[0, upper)``: scaling a lifetime by
``a > 0`` stays inside the family (see ``Distribution.scaled``), which the
probe in :mod:`pastentropy.characterization` relies on.

All functions accept scalars or arrays; scalars come back as ``float``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields
from typing import ClassVar, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "Support",
    "Distribution",
    "Uniform",
    "Exponential",
    "Weibull",
    "PowerFunction",
    "FAMILIES",
    "parse_distribution",
]


@dataclass(frozen=True)
class Support:
    lower: float
    upper: float  # math.inf for unbounded lifetimes

    def __post_init__(self):
        if not 0 <= self.lower < self.upper:
            raise DomainError(f"invalid support [{self.lower}, {self.upper}]")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.upper)


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


class Distribution:
    """Base class. Subclasses implement the ``_log*``/``_cdf``/``_ppf`` hooks
    for points inside the support; the public methods handle the rest."""

    family: ClassVar[str]
    shape_name: ClassVar[Optional[str]] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{self.family}: parameter {f.name}={value!r} must be positive and finite")
            object.__setattr__(self, f.name, float(value))

    # -- family hooks ---------------------------------------------------
    @property
    def support(self) -> Support:
        raise NotImplementedError

    @property
    def scale_param(self) -> float:
        raise NotImplementedError

    @property
    def shape_param(self) -> Optional[float]:
        return None if self.shape_name is None else getattr(self, self.shape_name)

    @classmethod
    def from_shape_scale(cls, shape, scale):
        raise NotImplementedError

    def _logpdf(self, x):
        raise NotImplementedError

    def _cdf(self, x):
        raise NotImplementedError

    def _logcdf(self, x):
        return np.log(self._cdf(x))

    def _logsf(self, x):
        return np.log1p(-self._cdf(x))

    def _ppf(self, u):
        raise NotImplementedError

    # -- public API -------------------------------------------------------
    def _inside(self, x):
        s = self.support
        return (x >= s.lower) & (x <= s.upper)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = self._inside(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inner = self._logpdf(np.where(inside, x, 0.5 * self.scale_param))
            out = np.where(inside, inner, -np.inf)
        return _ret(x, out)

    def pdf(self, x):
        with np.errstate(over="ignore"):
            return _ret(x, np.exp(self.logpdf(x)))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        s = self.support
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(x <= s.lower, 0.0, np.where(x >= s.upper, 1.0, self._cdf(np.clip(x, s.lower, s.upper if s.bounded else None))))
        return _ret(x, out)

    def survival(self, x):
        return _ret(x, 1.0 - np.asarray(self.cdf(x)))

    def logcdf(self, x):
        x = np.asarray(x, dtype=float)
        s = self.support
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inner = self._logcdf(np.where((x > s.lower) & (x < s.upper), x, 0.5 * self.scale_param))
            out = np.where(x <= s.lower, -np.inf, np.where(x >= s.upper, 0.0, inner))
        return _ret(x, out)

    def logsf(self, x):
        """Log of the survival probability, accurate deep in the tail."""
        x = np.asarray(x, dtype=float)
        s = self.support
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inner = self._logsf(np.where((x > s.lower) & (x < s.upper), x, 0.5 * self.scale_param))
            out = np.where(x <= s.lower, 0.0, np.where(x >= s.upper, -np.inf, inner))
        return _ret(x, out)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if not np.all((u > 0) & (u < 1)):
            raise DomainError("quantile needs probabilities strictly inside (0, 1)")
        return _ret(u, self._ppf(u))

    def sample(self, n: int, seed: int) -> np.ndarray:
        """``n`` draws by inversion of a seeded uniform stream."""
        if n < 1:
            raise DomainError("sample size must be at least 1")
        rng = np.random.default_rng(seed)
        # 53-bit grid shifted by half a step: strictly inside (0, 1)
        u = (rng.integers(0, 2 ** 53, size=n).astype(float) + 0.5) / 2.0 ** 53
        return np.atleast_1d(self._ppf(u))

    def scaled(self, a: float) -> "Distribution":
        """Law of ``a * X``."""
        if not a > 0:
            raise DomainError("scale factor must be positive")
        return self.from_shape_scale(self.shape_param, a * self.scale_param)

    @property
    def spec(self) -> str:
        params = ",".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return f"{self.family}:{params}"

    def __str__(self):
        return self.spec


@dataclass(frozen=True)
class Uniform(Distribution):
    b: float
    family: ClassVar[str] = "uniform"

    @property
    def support(self):
        return Support(0.0, self.b)

    @property
    def scale_param(self):
        return self.b

    @classmethod
    def from_shape_scale(cls, shape, scale):
        return cls(b=scale)

    def _logpdf(self, x):
        return np.full_like(x, -math.log(self.b))

    def _cdf(self, x):
        return x / self.b

    def _ppf(self, u):
        return u * self.b


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float
    family: ClassVar[str] = "exp"

    @property
    def support(self):
        return Support(0.0, math.inf)

    @property
    def scale_param(self):
        return 1.0 / self.rate

    @classmethod
    def from_shape_scale(cls, shape, scale):
        return cls(rate=1.0 / scale)

    def _logpdf(self, x):
        return math.log(self.rate) - self.rate * x

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def _logcdf(self, x):
        return np.log(-np.expm1(-self.rate * x))

    def _logsf(self, x):
        return -self.rate * x

    def _ppf(self, u):
        return -np.log1p(-u) / self.rate


@dataclass(frozen=True)
class Weibull(Distribution):
    shape: float
    scale: float
    family: ClassVar[str] = "weibull"
    shape_name: ClassVar[str] = "shape"

    @property
    def support(self):
        return Support(0.0, math.inf)

    @property
    def scale_param(self):
        return self.scale

    @classmethod
    def from_shape_scale(cls, shape, scale):
        return cls(shape=shape, scale=scale)

    def _logpdf(self, x):
        k, lam = self.shape, self.scale
        power = 0.0 if k == 1.0 else (k - 1.0) * np.log(x / lam)
        return math.log(k / lam) + power - (x / lam) ** k

    def _cdf(self, x):
        return -np.expm1(-((x / self.scale) ** self.shape))

    def _logcdf(self, x):
        lz = self.shape * np.log(x / self.scale)
        z = np.exp(lz)
        # log(1 - e^-z) = log z - z/2 + O(z^2) once z underflows expm1's range
        return np.where(lz < -30.0, lz - 0.5 * z, np.log(-np.expm1(-z)))

    def _logsf(self, x):
        return -((x / self.scale) ** self.shape)

    def _ppf(self, u):
        return self.scale * (-np.log1p(-u)) ** (1.0 / self.shape)


@dataclass(frozen=True)
class PowerFunction(Distribution):
    c: float
    b: float
    family: ClassVar[str] = "power"
    shape_name: ClassVar[str] = "c"

    @property
    def support(self):
        return Support(0.0, self.b)

    @property
    def scale_param(self):
        return self.b

    @classmethod
    def from_shape_scale(cls, shape, scale):
        return cls(c=shape, b=scale)

    def _logpdf(self, x):
        power = 0.0 if self.c == 1.0 else (self.c - 1.0) * np.log(x / self.b)
        return math.log(self.c / self.b) + power + np.zeros_like(x)

    def _cdf(self, x):
        return (x / self.b) ** self.c

    def _logcdf(self, x):
        return self.c * np.log(x / self.b)

    def _ppf(self, u):
        return self.b * u ** (1.0 / self.c)


FAMILIES = {cls.family: cls for cls in (Uniform, Exponential, Weibull, PowerFunction)}

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_SPEC = re.compile(rf"^([a-z]+):((?:[a-z]+={_NUMBER})(?:,[a-z]+={_NUMBER})*)$")


def parse_distribution(text: str) -> Distribution:
    """Parse ``family:name=value,...``, e.g. ``weibull:shape=1.5,scale=2``."""
    m = _SPEC.match(text)
    if not m:
        raise DomainError(f"malformed distribution spec {text!r}")
    family, body = m.groups()
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    cls = FAMILIES[family]
    params = {}
    for item in body.split(","):
        name, value = item.split("=")
        if name in params:
            raise DomainError(f"parameter {name!r} given twice in {text!r}")
        params[name] = float(value)
    expected = {f.name for f in fields(cls)}
    if set(params) != expected:
        raise DomainError(f"{family} takes parameters {sorted(expected)}, got {sorted(params)}")
    return cls(**params)
