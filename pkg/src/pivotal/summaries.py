"""Monte Carlo summaries: means with errors, empirical CDFs, KS two-sample test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class MCSummary:
    mean: float
    stderr: float
    ci95: tuple[float, float]
    n: int


def mc_summary(samples) -> MCSummary:
    """Sample mean, standard error and 95% normal CI."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    mean = float(np.mean(x))
    stderr = float(np.std(x, ddof=1) / math.sqrt(x.size))
    return MCSummary(mean, stderr, (mean - _Z95 * stderr, mean + _Z95 * stderr), x.size)


class EmpiricalCdf:
    """Right-continuous empirical distribution function."""

    def __init__(self, samples):
        x = np.asarray(samples, dtype=float)
        if x.size < 2:
            raise ValueError("need at least 2 samples")
        self.sorted = np.sort(x)
        self.n = x.size

    def __call__(self, x):
        idx = np.searchsorted(self.sorted, np.asarray(x, dtype=float), side="right")
        return idx / self.n


def empirical_cdf(samples) -> EmpiricalCdf:
    return EmpiricalCdf(samples)


def smoothed_density(samples, x: float, bandwidth: float) -> float:
    """Central difference of the empirical CDF: [F(x+h) - F(x-h)] / (2h)."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    cdf = samples if isinstance(samples, EmpiricalCdf) else EmpiricalCdf(samples)
    return float(cdf(x + bandwidth) - cdf(x - bandwidth)) / (2.0 * bandwidth)


def kolmogorov_sf(t: float, terms: int = 101) -> float:
    """Asymptotic Kolmogorov survival function Q(t) = 2 sum (-1)^{j-1} exp(-2 j^2 t^2)."""
    if t <= 0:
        return 1.0
    j = np.arange(1, terms + 1, dtype=float)
    s = 2.0 * np.sum((-1.0) ** (j - 1) * np.exp(-2.0 * j * j * t * t))
    return float(min(1.0, max(0.0, s)))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    x = np.sort(np.asarray(a, dtype=float))
    y = np.sort(np.asarray(b, dtype=float))
    if x.size < 2 or y.size < 2:
        raise ValueError("need at least 2 samples per side")
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    stat = float(np.max(np.abs(fx - fy)))
    neff = x.size * y.size / (x.size + y.size)
    return stat, kolmogorov_sf(math.sqrt(neff) * stat)
