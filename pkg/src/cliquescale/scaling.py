"""Power-law scaling of clique counts with network size."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .cliques import CliqueProfile


def fit_power_law(sizes: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """OLS fit of ``log10(values)`` on ``log10(sizes)``.

    Returns ``(exponent, stderr, intercept)`` where ``stderr`` is the usual
    standard error of the slope.
    """
    x = np.asarray(sizes, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("sizes and values must be 1-d and the same length")
    if x.size < 3:
        raise ValueError(f"need at least 3 points, got {x.size}")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("sizes and values must be positive")
    lx, ly = np.log10(x), np.log10(y)
    if np.ptp(lx) == 0:
        raise ValueError("sizes must not all be equal")
    res = stats.linregress(lx, ly)
    return float(res.slope), float(res.stderr), float(res.intercept)


class PowerLawFit(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`fit_power_law`: ``y ~ 10**intercept_ * N**exponent_``."""

    def fit(self, X, y):
        sizes = column_or_1d(X)
        self.exponent_, self.stderr_, self.intercept_ = fit_power_law(sizes, column_or_1d(y))
        self.n_points_ = len(sizes)
        return self

    def predict(self, X):
        check_is_fitted(self)
        return 10.0 ** self.intercept_ * np.power(column_or_1d(X).astype(float), self.exponent_)

    def score(self, X, y, sample_weight=None):
        """R^2 in log-log space."""
        from sklearn.metrics import r2_score

        return r2_score(np.log10(column_or_1d(y)), np.log10(self.predict(X)), sample_weight=sample_weight)


@dataclass
class SpectrumEntry:
    k: int
    exponent: float
    stderr: float
    intercept: float
    n_points: int


@dataclass
class ExponentSpectrum:
    entries: dict[int, SpectrumEntry] = field(default_factory=dict)

    def __getitem__(self, k: int) -> SpectrumEntry:
        return self.entries[k]

    def __contains__(self, k: int) -> bool:
        return k in self.entries

    @property
    def ks(self) -> list[int]:
        return sorted(self.entries)

    def exponents(self) -> dict[int, float]:
        return {k: e.exponent for k, e in sorted(self.entries.items())}

    def rows(self):
        return [(e.k, e.exponent, e.stderr, e.intercept, e.n_points) for _, e in sorted(self.entries.items())]


def exponent_spectrum(profiles: Sequence[CliqueProfile], n_min: int = 100, k_min: int = 2) -> ExponentSpectrum:
    """Fit one scaling exponent per clique size across snapshots.

    Snapshots smaller than ``n_min`` are skipped; for each ``k``, snapshots
    with no ``k``-cliques are left out, and sizes with fewer than three usable
    snapshots get no entry.
    """
    snaps = [p for p in profiles if p.n >= n_min]
    if len(snaps) < 3:
        raise ValueError(f"need at least 3 snapshots with N >= {n_min}, got {len(snaps)}")
    ks = sorted({k for p in snaps for k in p.counts if k >= k_min})
    spectrum = ExponentSpectrum()
    for k in ks:
        pts = [(p.n, p[k]) for p in snaps if p[k] > 0]
        if len(pts) < 3 or len({n for n, _ in pts}) < 2:
            continue
        slope, se, icpt = fit_power_law([n for n, _ in pts], [c for _, c in pts])
        spectrum.entries[k] = SpectrumEntry(k, slope, se, icpt, len(pts))
    return spectrum


@dataclass
class AggregateSpectrum:
    """Per-size exponent mean, standard deviation and standard error over realizations."""

    mean: dict[int, float]
    std: dict[int, float]
    stderr: dict[int, float]
    n: dict[int, int]


def aggregate_spectra(spectra: Sequence[ExponentSpectrum]) -> AggregateSpectrum:
    ks = sorted({k for s in spectra for k in s.ks})
    mean, std, se, count = {}, {}, {}, {}
    for k in ks:
        vals = np.array([s[k].exponent for s in spectra if k in s])
        mean[k] = float(vals.mean())
        std[k] = float(vals.std(ddof=1)) if vals.size > 1 else math.nan
        se[k] = std[k] / math.sqrt(vals.size) if vals.size > 1 else math.nan
        count[k] = int(vals.size)
    return AggregateSpectrum(mean, std, se, count)


@dataclass
class Envelope:
    sizes: list[int]
    counts: list[int]
    source_k: list[int]
    exponent: float = math.nan
    stderr: float = math.nan
    intercept: float = math.nan

    def rows(self):
        return list(zip(self.sizes, self.counts, self.source_k))


def envelope_curve(profiles: Sequence[CliqueProfile], n_min: int = 0) -> Envelope:
    """Largest clique count over ``k >= 2`` at each snapshot, and its power-law fit.

    The fit is left as NaN when fewer than three snapshots have a positive
    envelope.
    """
    if not profiles:
        raise ValueError("need at least one snapshot")
    sizes, counts, source = [], [], []
    for p in profiles:
        if p.n < n_min:
            continue
        best_k, best = 2, 0
        for k, c in sorted(p.counts.items()):
            if k >= 2 and c > best:
                best_k, best = k, c
        sizes.append(p.n)
        counts.append(best)
        source.append(best_k)
    env = Envelope(sizes, counts, source)
    pts = [(n, c) for n, c in zip(sizes, counts) if c > 0]
    if len(pts) >= 3 and len({n for n, _ in pts}) >= 2:
        env.exponent, env.stderr, env.intercept = fit_power_law([n for n, _ in pts], [c for _, c in pts])
    return env
