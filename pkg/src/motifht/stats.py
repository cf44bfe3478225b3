"""Distributional statistics used by the experiment harness."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError


def ks_to_standard_normal(samples) -> float:
    """One-sample Kolmogorov-Smirnov distance to N(0,1)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if not len(x):
        raise DomainError("need at least one sample")
    r = len(x)
    cdf = ndtr(x)
    grid = np.arange(1, r + 1) / r
    return float(max(np.abs(grid - cdf).max(), np.abs(cdf - (grid - 1.0 / r)).max()))


def ks_to_fitted_normal(samples) -> float:
    """KS distance to the normal with the sample's own mean and sd."""
    x = np.asarray(samples, dtype=np.float64)
    sd = x.std()
    if sd == 0:
        return 1.0
    return ks_to_standard_normal((x - x.mean()) / sd)


def empirical_wasserstein(samples) -> float:
    """Order-statistics coupling estimate of the W1 distance to N(0,1):
    mean |x_(i) - quantile((i-0.5)/R)| over the sorted sample."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    r = len(x)
    if r < 100:
        raise DomainError(f"need at least 100 samples, got {r}")
    targets = ndtri((np.arange(1, r + 1) - 0.5) / r)
    return float(np.abs(x - targets).mean())


def poisson_pmf(k: np.ndarray, lam: float) -> np.ndarray:
    k = np.asarray(k)
    out = np.zeros(len(k), dtype=np.float64)
    ok = k >= 0
    kk = k[ok].astype(np.float64)
    out[ok] = np.exp(-lam + kk * math.log(lam) -
                     np.array([math.lgamma(v + 1.0) for v in kk]))
    return out


def tv_to_poisson(samples, lam: float = 1.0, shift: int = 1) -> float:
    """Total variation distance between round(samples)+shift and Poisson(lam),
    over the integer lattice."""
    x = np.asarray(samples, dtype=np.float64)
    if not len(x):
        raise DomainError("need at least one sample")
    vals = np.rint(x).astype(np.int64) + shift
    keys, counts = np.unique(vals, return_counts=True)
    emp = counts / len(x)
    pois = poisson_pmf(keys, lam)
    covered = float(pois.sum())
    return float(0.5 * (np.abs(emp - pois).sum() + (1.0 - covered)))


def histogram_summary(samples, bins: int = 40) -> dict:
    """Equal-width histogram with masses summing to one."""
    x = np.asarray(samples, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return {"edges": [lo, hi], "mass": [1.0]}
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    return {"edges": [float(e) for e in edges],
            "mass": [float(c) / len(x) for c in counts]}
