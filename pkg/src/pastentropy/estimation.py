"""Past entropy from data: a spacings (Vasicek-type) entropy estimate on the
part of the sample that failed before ``t``.

Given failure before ``t`` the lifetime has density ``f / F(t)`` on
``(0, t)``, so the past entropy is the plain differential entropy of the
subsample ``{x_i <= t}``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateSampleError, DomainError, InsufficientDataError, PreconditionError

__all__ = [
    "MIN_SUBSAMPLE",
    "Sample",
    "empirical_cdf",
    "spacings_entropy",
    "past_entropy_estimate",
]

MIN_SUBSAMPLE = 10


@dataclass(frozen=True)
class Sample:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("sample values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.n

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x"])
        w.writerows([format(v, ".17g")] for v in self.values)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "Sample":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["x"]:
                raise DomainError(f"{path}: expected header 'x', got {header}")
            try:
                values = [float(row[0]) for row in reader if row]
            except ValueError as exc:
                raise DomainError(f"{path}: unreadable value ({exc})") from None
        return cls(np.array(values))


def empirical_cdf(sample: Sample, x: float) -> float:
    if sample.n < 1:
        raise PreconditionError("empirical cdf of an empty sample")
    return np.count_nonzero(sample.values <= x) / sample.n


def spacings_entropy(values, window: Optional[int] = None) -> float:
    """Vasicek estimate ``(1/k) sum_i log(k/(2m) (x_(i+m) - x_(i-m)))`` with
    order-statistic indices clamped to ``[1, k]``; ``m`` defaults to
    ``floor(sqrt(k))``."""
    x = np.sort(np.asarray(values, dtype=float))
    k = x.size
    if k < 2:
        raise InsufficientDataError(f"spacings need at least 2 values, got {k}")
    m = math.isqrt(k) if window is None else int(window)
    if not 1 <= m < k:
        raise PreconditionError(f"window must lie in [1, {k - 1}], got {m}")
    i = np.arange(k)
    spacing = x[np.minimum(i + m, k - 1)] - x[np.maximum(i - m, 0)]
    if np.any(spacing <= 0):
        j = int(np.argmax(spacing <= 0))
        raise DegenerateSampleError(f"zero spacing around order statistic {j + 1} (tied values)")
    return float(np.mean(np.log(k / (2.0 * m) * spacing)))


def past_entropy_estimate(sample: Sample, t: float, window: Optional[int] = None) -> float:
    """Spacings estimate of the past entropy at ``t`` from the values ``<= t``."""
    if math.isnan(t):
        raise DomainError("t must be a number")
    sub = sample.values[sample.values <= t]
    if sub.size < MIN_SUBSAMPLE:
        raise InsufficientDataError(
            f"only {sub.size} values at or below t={t!r}; need at least {MIN_SUBSAMPLE}"
        )
    return spacings_entropy(sub, window)
