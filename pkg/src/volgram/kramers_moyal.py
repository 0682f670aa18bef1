"""Drift/diffusion reconstruction from a fitted-parameter time series.

The parameter series is treated as a realization of
``d phi = D1(phi) dt + sqrt(D2(phi)) dW`` with the Wiener normalization
``<W_t W_t'> = 2 delta(t - t')``, so a simulated step carries variance
``2 D2 dt``.  Conditional moments of the tau-step increments are fitted
linearly in tau with an intercept; the slopes give D1 and D2 (the latter
halved, from the 1/n! in the coefficient definition) and the intercept
of the second moment at the mean-value bin gives the measurement-noise
amplitude sqrt(a2 / 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (AllBinsUnderpopulated, DomainError, InsufficientTauPoints,
                     MeanBinUnpopulated, SeriesTooShort)


@dataclass(frozen=True)
class ParamSeries:
    """Time-ordered fitted parameter values.

    ``gaps`` lists indices i such that a market-closed break (or any
    other discontinuity) separates values[i] and values[i+1]; increments
    spanning such a step never enter moment estimation.
    """
    times: np.ndarray
    values: np.ndarray
    dt: float = 1.0
    gaps: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "gaps", np.asarray(self.gaps, dtype=int))
        if self.times.shape != self.values.shape:
            raise DomainError("times and values must have equal length")
        if np.any(~np.isfinite(self.values)):
            raise DomainError("parameter series contains non-finite values")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ConditionalMoments:
    """Binned conditional moments M1, M2 of tau-step increments.

    Only bins whose conditioning count reaches ``min_count`` at every
    tau are reported; arrays are indexed [bin, tau-1].
    """
    bin_centers: np.ndarray
    counts: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    taus: np.ndarray
    dt: float
    mean_value: float
    bin_width: float
    min_count: int


@dataclass(frozen=True)
class KMCoefficients:
    """Per-bin drift/diffusion estimates plus the global drift line."""
    bin_centers: np.ndarray
    counts: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d2_raw: np.ndarray
    negative_d2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    m1_line_rss: np.ndarray
    m2_line_rss: np.ndarray
    noise_sigma: float
    drift_slope: float
    fixed_point: float
    sqrt_mean_d2: float
    tau_fit_range: tuple[int, int]


def _gap_prefix(series: ParamSeries) -> np.ndarray:
    """Prefix sums G with G[t2] - G[t1] == 0 iff no gap inside (t1, t2]."""
    n = len(series)
    flags = np.zeros(n, dtype=np.int64)
    if series.gaps.size:
        g = series.gaps
        if np.any(g < 0) or np.any(g >= n - 1):
            raise DomainError("gap indices must lie in [0, len-2]")
        flags[g + 1] = 1
    return np.cumsum(flags)


def conditional_moments(series: ParamSeries, n_bins: int = 50,
                        tau_max: int = 10, min_count: int = 100,
                        ) -> ConditionalMoments:
    """Average tau-step increments and their squares, conditioned on the
    equal-width bin of the starting value."""
    if tau_max < 3:
        raise InsufficientTauPoints("tau_max must be at least 3")
    n = len(series)
    if n < 10 * n_bins:
        raise SeriesTooShort(f"need at least {10 * n_bins} points for "
                             f"{n_bins} bins, got {n}")
    v = series.values
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        # constant series: give the grid a token width so the single
        # populated bin reports its (zero) moments
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, n_bins + 1)
    width = edges[1] - edges[0]
    idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, n_bins - 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    prefix = _gap_prefix(series)

    counts = np.zeros((n_bins, tau_max), dtype=np.int64)
    m1 = np.full((n_bins, tau_max), np.nan)
    m2 = np.full((n_bins, tau_max), np.nan)
    for tau in range(1, tau_max + 1):
        if tau >= n:
            break
        inc = v[tau:] - v[:-tau]
        valid = (prefix[tau:] - prefix[:-tau]) == 0
        b = idx[:-tau][valid]
        inc = inc[valid]
        cnt = np.bincount(b, minlength=n_bins)
        s1 = np.bincount(b, weights=inc, minlength=n_bins)
        s2 = np.bincount(b, weights=inc * inc, minlength=n_bins)
        col = tau - 1
        counts[:, col] = cnt
        nz = cnt > 0
        m1[nz, col] = s1[nz] / cnt[nz]
        m2[nz, col] = s2[nz] / cnt[nz]

    reported = counts.min(axis=1) >= min_count
    if not np.any(reported):
        raise AllBinsUnderpopulated(
            f"no bin reaches min_count={min_count} at every tau")
    return ConditionalMoments(
        bin_centers=centers[reported],
        counts=counts[reported],
        m1=m1[reported],
        m2=m2[reported],
        taus=np.arange(1, tau_max + 1),
        dt=series.dt,
        mean_value=float(v.mean()),
        bin_width=float(width),
        min_count=min_count,
    )


def _line_fit(y: np.ndarray, taus: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row OLS of y against tau; returns (intercept, slope, rss)."""
    tm = taus.mean()
    dtau = taus - tm
    denom = float((dtau * dtau).sum())
    ym = y.mean(axis=1)
    slope = ((y - ym[:, None]) * dtau).sum(axis=1) / denom
    intercept = ym - slope * tm
    resid = y - (intercept[:, None] + slope[:, None] * taus)
    return intercept, slope, (resid * resid).sum(axis=1)


def _mean_bin_index(moments: ConditionalMoments) -> int:
    return int(np.argmin(np.abs(moments.bin_centers - moments.mean_value)))


def km_estimate(moments: ConditionalMoments,
                tau_fit_range: tuple[int, int] = (1, 5)) -> KMCoefficients:
    """Extract D1, D2, the measurement-noise amplitude, and the affine
    drift line from the conditional moments.

    Per bin, M_n(tau) is fitted as a_n + b_n tau over the requested lag
    range; D1 = b1/dt and D2 = b2/(2 dt).  The drift line is a weighted
    least-squares fit of D1 against the bin centers with the conditioning
    counts as weights; its zero crossing is the fixed point.
    """
    tau_lo, tau_hi = int(tau_fit_range[0]), int(tau_fit_range[1])
    if tau_lo < 1 or tau_hi > int(moments.taus[-1]) or tau_hi - tau_lo + 1 < 3:
        raise InsufficientTauPoints(
            f"need >= 3 lag points inside [1, {int(moments.taus[-1])}], "
            f"got [{tau_lo}, {tau_hi}]")
    sel = slice(tau_lo - 1, tau_hi)
    taus = moments.taus[sel].astype(float)
    a1, b1, rss1 = _line_fit(moments.m1[:, sel], taus)
    a2, b2, rss2 = _line_fit(moments.m2[:, sel], taus)
    d1 = b1 / moments.dt
    d2_raw = b2 / (2.0 * moments.dt)
    negative = d2_raw < 0.0
    d2 = np.where(negative, 0.0, d2_raw)

    mean_bin = _mean_bin_index(moments)
    noise_sigma = float(np.sqrt(max(a2[mean_bin], 0.0) / 2.0))

    w = moments.counts[:, tau_lo - 1].astype(float)
    centers = moments.bin_centers
    wsum = w.sum()
    xm = float((w * centers).sum() / wsum)
    ym = float((w * d1).sum() / wsum)
    var = float((w * (centers - xm) ** 2).sum())
    if var <= 0.0:
        slope = 0.0
        fixed_point = float("nan")
    else:
        slope = float((w * (centers - xm) * (d1 - ym)).sum() / var)
        intercept = ym - slope * xm
        fixed_point = -intercept / slope if slope != 0.0 else float("nan")

    return KMCoefficients(
        bin_centers=centers,
        counts=moments.counts[:, tau_lo - 1].copy(),
        d1=d1,
        d2=d2,
        d2_raw=d2_raw,
        negative_d2=negative,
        a1=a1,
        a2=a2,
        m1_line_rss=rss1,
        m2_line_rss=rss2,
        noise_sigma=noise_sigma,
        drift_slope=slope,
        fixed_point=fixed_point,
        sqrt_mean_d2=float(np.sqrt(d2.mean())),
        tau_fit_range=(tau_lo, tau_hi),
    )


def estimate_measurement_noise(moments: ConditionalMoments,
                               tau_fit_range: tuple[int, int] = (1, 5)) -> float:
    """Noise amplitude sqrt(a2/2) from the extrapolated tau -> 0 intercept
    of M2 at the bin containing the series mean."""
    centers = moments.bin_centers
    half = 0.5 * moments.bin_width
    mean_bin = _mean_bin_index(moments)
    if abs(centers[mean_bin] - moments.mean_value) > half * (1.0 + 1e-9):
        raise MeanBinUnpopulated(
            "the bin containing the series mean fell below min_count")
    tau_lo, tau_hi = int(tau_fit_range[0]), int(tau_fit_range[1])
    if tau_lo < 1 or tau_hi > int(moments.taus[-1]) or tau_hi - tau_lo + 1 < 3:
        raise InsufficientTauPoints(
            f"need >= 3 lag points inside [1, {int(moments.taus[-1])}]")
    sel = slice(tau_lo - 1, tau_hi)
    taus = moments.taus[sel].astype(float)
    a2, _, _ = _line_fit(moments.m2[mean_bin:mean_bin + 1, sel], taus)
    return float(np.sqrt(max(float(a2[0]), 0.0) / 2.0))


@dataclass(frozen=True)
class MarkovTestResult:
    distance: float
    threshold: float
    passed: bool
    n_cells: int


def _binned_markov_distance(idx: np.ndarray, valid: np.ndarray, n_bins: int,
                            lag: int, min_cell: int) -> tuple[float, int]:
    """Count-weighted mean |p(x3|x2,x1) - p(x3|x2)| over conditioning
    cells (x1, x2) with at least ``min_cell`` events."""
    h = idx[:-2 * lag]
    i = idx[lag:-lag]
    j = idx[2 * lag:]
    h, i, j = h[valid], i[valid], j[valid]
    c3 = np.bincount((h * n_bins + i) * n_bins + j,
                     minlength=n_bins ** 3).reshape(n_bins, n_bins, n_bins)
    c2 = np.bincount(i * n_bins + j,
                     minlength=n_bins ** 2).reshape(n_bins, n_bins)
    n3 = c3.sum(axis=2)
    n2 = c2.sum(axis=1)
    keep = n3 >= min_cell
    if not keep.any():
        return float("nan"), 0
    with np.errstate(invalid="ignore", divide="ignore"):
        p3 = c3 / np.maximum(n3, 1)[:, :, None]
        p2 = c2 / np.maximum(n2, 1)[:, None]
    diff = np.abs(p3 - p2[None, :, :]).mean(axis=2)
    w = n3 * keep
    return float((w * diff).sum() / w.sum()), int(keep.sum())


def markov_test(series: ParamSeries, n_bins: int = 20, lag: int = 1,
                min_cell_count: int = 30, n_surrogates: int = 100,
                threshold_percentile: float = 95.0,
                seed: int = 0) -> MarkovTestResult:
    """Compare two-point and three-point conditional probabilities.

    The distance between p(x3|x2) and p(x3|x2,x1) on a bin grid is
    calibrated against shuffled surrogates, which destroy all temporal
    structure while preserving the marginal; the series passes when its
    distance stays below the surrogate percentile.
    """
    n = len(series)
    if n < 10 * n_bins or n < 2 * lag + 1:
        raise SeriesTooShort(f"series of length {n} too short for the "
                             f"{n_bins}-bin Markov test")
    v = series.values
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, n_bins - 1)
    prefix = _gap_prefix(series)
    valid = (prefix[2 * lag:] - prefix[:-2 * lag]) == 0

    distance, n_cells = _binned_markov_distance(idx, valid, n_bins, lag,
                                                min_cell_count)
    if n_cells == 0:
        raise AllBinsUnderpopulated(
            f"no conditioning cell reaches {min_cell_count} events")

    rng = np.random.default_rng(seed)
    surrogate = idx.copy()
    stats = np.empty(n_surrogates)
    for k in range(n_surrogates):
        rng.shuffle(surrogate)
        stats[k], _ = _binned_markov_distance(surrogate, valid, n_bins, lag,
                                              min_cell_count)
    if np.any(np.isnan(stats)):
        raise AllBinsUnderpopulated(
            "surrogate calibration found no qualifying cells; reduce "
            "n_bins or min_cell_count for a series of this length")
    threshold = float(np.percentile(stats, threshold_percentile,
                                    method="higher"))
    return MarkovTestResult(distance=distance, threshold=threshold,
                            passed=bool(distance <= threshold),
                            n_cells=n_cells)
