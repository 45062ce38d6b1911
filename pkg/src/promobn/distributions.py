"""Scaled triangular and lognormal distribution terms.

A term is an immutable value: a base distribution plus a positive scalar
multiplier. Sampling consumes a fixed number of uniforms per draw (one for
triangular via its inverse CDF, two for lognormal via a Box-Muller normal),
which lets the engine lay out reproducible random streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TriangularTerm:
    """``scale * Triangular(minimum, mode, maximum)`` in sales units."""

    minimum: float
    mode: float
    maximum: float
    scale: float = 1.0

    uniforms_per_draw = 1

    def __post_init__(self) -> None:
        if not (self.minimum <= self.mode <= self.maximum):
            raise ValueError(
                f"triangular needs min <= mode <= max, got "
                f"({self.minimum}, {self.mode}, {self.maximum})"
            )
        if not self.minimum < self.maximum:
            raise ValueError("triangular needs min < max")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def support(self) -> tuple[float, float]:
        return self.scale * self.minimum, self.scale * self.maximum

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF transform; row 0 of ``u`` holds the uniforms."""
        a, c, b = self.minimum, self.mode, self.maximum
        u0 = np.asarray(u)[0]
        split = (c - a) / (b - a)
        left = a + np.sqrt(u0 * (b - a) * (c - a))
        right = b - np.sqrt((1.0 - u0) * (b - a) * (b - c))
        return self.scale * np.where(u0 < split, left, right)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        u = rng.random((1, 1 if size is None else size))
        out = self.from_uniforms(u)
        return float(out[0]) if size is None else out

    def pdf(self, x):
        scalar = np.isscalar(x)
        y = np.atleast_1d(np.asarray(x, dtype=float)) / self.scale
        a, c, b = self.minimum, self.mode, self.maximum
        out = np.zeros_like(y)
        if c > a:
            m = (y >= a) & (y < c)
            out[m] = 2.0 * (y[m] - a) / ((b - a) * (c - a))
        if b > c:
            m = (y > c) & (y <= b)
            out[m] = 2.0 * (b - y[m]) / ((b - a) * (b - c))
        out[y == c] = 2.0 / (b - a)
        out /= self.scale
        return float(out[0]) if scalar else out

    def mean_variance(self) -> tuple[float, float]:
        a, c, b = self.minimum, self.mode, self.maximum
        mean = (a + c + b) / 3.0
        var = (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0
        return self.scale * mean, self.scale * self.scale * var

    def scaled(self, factor: float) -> "TriangularTerm":
        return replace(self, scale=self.scale * factor)


@dataclass(frozen=True)
class LognormalTerm:
    """``scale * Lognormal(mu, sigma)``; mu/sigma are moments of the natural log."""

    mu: float
    sigma: float
    scale: float = 1.0

    uniforms_per_draw = 2

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, math.inf

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Box-Muller transform of two uniforms (rows 0 and 1 of ``u``)."""
        u = np.asarray(u)
        # log1p(-u) = log(1 - u) stays finite for u in [0, 1)
        z = np.sqrt(-2.0 * np.log1p(-u[0])) * np.cos(2.0 * np.pi * u[1])
        return self.scale * np.exp(self.mu + self.sigma * z)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        u = rng.random((2, 1 if size is None else size))
        out = self.from_uniforms(u)
        return float(out[0]) if size is None else out

    def pdf(self, x):
        scalar = np.isscalar(x)
        y = np.atleast_1d(np.asarray(x, dtype=float)) / self.scale
        out = np.zeros_like(y)
        pos = y > 0
        yp = y[pos]
        out[pos] = np.exp(-((np.log(yp) - self.mu) ** 2) / (2.0 * self.sigma**2)) / (
            yp * self.sigma * _SQRT_2PI
        )
        out /= self.scale
        return float(out[0]) if scalar else out

    def mean_variance(self) -> tuple[float, float]:
        s2 = self.sigma * self.sigma
        mean = math.exp(self.mu + s2 / 2.0)
        var = (math.exp(s2) - 1.0) * math.exp(2.0 * self.mu + s2)
        return self.scale * mean, self.scale * self.scale * var

    def scaled(self, factor: float) -> "LognormalTerm":
        return replace(self, scale=self.scale * factor)


DistTerm = TriangularTerm | LognormalTerm


def scale_lognormal(mu: float, sigma: float, c: float) -> tuple[float, float]:
    """Fold a scalar multiplier into lognormal parameters.

    ``c * exp(mu + sigma*Z) = exp(mu + ln(c) + sigma*Z)``, so the log-mean
    shifts by ``ln(c)`` and sigma is unchanged.
    """
    if not c > 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    return mu + math.log(c), sigma


def fit_lognormal_log_moments(samples) -> tuple[float, float]:
    """Fit (mu, sigma) as mean and n-1 SD of the natural log of the data."""
    xs = np.asarray(samples, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least 2 samples to fit a lognormal")
    if np.any(xs <= 0):
        raise ValueError("lognormal fit requires strictly positive samples")
    logs = np.log(xs)
    mu = float(logs.mean())
    sigma = float(logs.std(ddof=1))
    if sigma == 0.0:
        raise ValueError("degenerate fit: all samples equal, sigma would be 0")
    return mu, sigma


def fit_triangular(samples, mode_hint: float | None = None) -> tuple[float, float, float]:
    """Fit (min, mode, max) from sample extremes and a known or estimated mode.

    Without a hint the mode is the most frequent value after rounding to
    integer units (sales are unit counts); ties pick the smallest value.
    """
    xs = np.asarray(samples, dtype=float)
    if xs.size < 3:
        raise ValueError("need at least 3 samples to fit a triangular")
    lo = float(xs.min())
    hi = float(xs.max())
    if lo == hi:
        raise ValueError("degenerate data: all samples equal")
    if mode_hint is not None:
        if not lo <= mode_hint <= hi:
            raise ValueError(f"mode hint {mode_hint} outside data range [{lo}, {hi}]")
        mode = float(mode_hint)
    else:
        values, counts = np.unique(np.rint(xs), return_counts=True)
        mode = float(values[counts == counts.max()].min())
        mode = min(max(mode, lo), hi)
    return lo, mode, hi


def tukey_fences(samples) -> tuple[float, float]:
    """Boxplot fences Q1 - 1.5*IQR and Q3 + 1.5*IQR (linear-interpolation quartiles)."""
    xs = np.asarray(samples, dtype=float)
    if xs.size < 4:
        raise ValueError("need at least 4 samples for Tukey fences")
    q1, q3 = np.percentile(xs, [25.0, 75.0])
    iqr = q3 - q1
    return float(q1 - 1.5 * iqr), float(q3 + 1.5 * iqr)


def remove_outliers(samples) -> np.ndarray:
    """Drop values outside the Tukey fences, repeating until stable.

    Re-filtering after a removal can tighten the fences, so a single pass is
    not a fixed point; iterating makes the result idempotent.
    """
    xs = np.asarray(samples, dtype=float)
    while xs.size >= 4:
        lower, upper = tukey_fences(xs)
        kept = xs[(xs >= lower) & (xs <= upper)]
        if kept.size == xs.size:
            break
        xs = kept
    return xs
