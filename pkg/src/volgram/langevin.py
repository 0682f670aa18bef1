"""Synthetic ground-truth generators.

``simulate_langevin`` integrates ``d phi = D1 dt + sqrt(D2) dW`` by
Euler-Maruyama under the 2-delta Wiener normalization, so each step adds
noise of variance ``2 D2 dt``.  ``simulate_gbm`` uses the exact
log-space update of geometric Brownian motion, whose Wiener process
carries the standard normalization (variance ``dt`` per step).
``simulate_market`` combines the two layers: an inverse-gamma cross
section per window whose tail parameter follows a Langevin trajectory.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .distributions import ModelKind, ModelParams
from .errors import DomainError
from .kramers_moyal import ParamSeries
from .market_data import SnapshotWindow

_MIN_MARKET_PHI = 0.05


@dataclass(frozen=True)
class LangevinSpec:
    """Drift/diffusion description of one trajectory.

    Drift is either affine, ``D1(x) = drift_slope * (x - fixed_point)``
    (a restoring force has negative slope), or tabulated on a grid and
    linearly interpolated with clamped ends.  Diffusion is a constant
    ``D2`` or a table.
    """
    dt: float
    n_steps: int
    initial: float
    seed: int
    drift_slope: float | None = None
    fixed_point: float | None = None
    drift_table: tuple | None = None       # (grid, d1 values)
    diffusion: float | None = None         # constant D2
    diffusion_table: tuple | None = None   # (grid, d2 values)

    def __post_init__(self):
        if self.dt <= 0.0:
            raise DomainError("dt must be positive")
        if self.n_steps < 1:
            raise DomainError("n_steps must be >= 1")
        affine = self.drift_slope is not None and self.fixed_point is not None
        if affine == (self.drift_table is not None):
            raise DomainError("specify either affine drift or a drift table")
        if (self.diffusion is not None) == (self.diffusion_table is not None):
            raise DomainError("specify either constant diffusion or a table")
        if self.diffusion is not None and self.diffusion < 0.0:
            raise DomainError("D2 must be non-negative")
        if self.diffusion_table is not None and np.any(
                np.asarray(self.diffusion_table[1], dtype=float) < 0.0):
            raise DomainError("tabulated D2 must be non-negative everywhere")


@dataclass(frozen=True)
class GBMSpec:
    mu: float
    sigma: float
    s0: float
    dt: float
    n_steps: int
    seed: int

    def __post_init__(self):
        if self.s0 <= 0.0:
            raise DomainError("S0 must be positive")
        if self.dt <= 0.0:
            raise DomainError("dt must be positive")
        if self.n_steps < 1:
            raise DomainError("n_steps must be >= 1")
        if self.sigma < 0.0:
            raise DomainError("sigma must be non-negative")


@dataclass(frozen=True)
class MarketSim:
    """Synthetic market windows plus the tail-parameter ground truth."""
    windows: list[SnapshotWindow]
    truth: ParamSeries


def simulate_langevin(spec: LangevinSpec) -> ParamSeries:
    """Euler-Maruyama trajectory of length n_steps.

    Update rule: x += D1(x) dt + sqrt(2 D2(x) dt) xi, with xi standard
    normal; the factor two implements the 2-delta Wiener convention.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_steps
    noise = rng.standard_normal(n - 1) if n > 1 else np.empty(0)
    values = np.empty(n)
    x = float(spec.initial)
    values[0] = x
    dt = spec.dt

    if spec.drift_table is None:
        slope = float(spec.drift_slope)
        fp = float(spec.fixed_point)
        if spec.diffusion is not None:
            step_scale = math.sqrt(2.0 * spec.diffusion * dt)
            steps = (noise * step_scale).tolist()
            for i, eta in enumerate(steps):
                x += slope * (x - fp) * dt + eta
                values[i + 1] = x
            return ParamSeries(times=np.arange(n) * dt, values=values, dt=dt)
        d_grid, d_vals = (np.asarray(spec.diffusion_table[0], dtype=float),
                          np.asarray(spec.diffusion_table[1], dtype=float))
        for i in range(n - 1):
            d2 = float(np.interp(x, d_grid, d_vals))
            x += slope * (x - fp) * dt + math.sqrt(2.0 * d2 * dt) * noise[i]
            values[i + 1] = x
        return ParamSeries(times=np.arange(n) * dt, values=values, dt=dt)

    g_grid, g_vals = (np.asarray(spec.drift_table[0], dtype=float),
                      np.asarray(spec.drift_table[1], dtype=float))
    if spec.diffusion is not None:
        const_scale = math.sqrt(2.0 * spec.diffusion * dt)
        for i in range(n - 1):
            d1 = float(np.interp(x, g_grid, g_vals))
            x += d1 * dt + const_scale * noise[i]
            values[i + 1] = x
        return ParamSeries(times=np.arange(n) * dt, values=values, dt=dt)
    d_grid, d_vals = (np.asarray(spec.diffusion_table[0], dtype=float),
                      np.asarray(spec.diffusion_table[1], dtype=float))
    for i in range(n - 1):
        d1 = float(np.interp(x, g_grid, g_vals))
        d2 = float(np.interp(x, d_grid, d_vals))
        x += d1 * dt + math.sqrt(2.0 * d2 * dt) * noise[i]
        values[i + 1] = x
    return ParamSeries(times=np.arange(n) * dt, values=values, dt=dt)


def add_measurement_noise(series: ParamSeries, sigma_m: float,
                          seed: int) -> ParamSeries:
    """Superimpose i.i.d. N(0, sigma_m^2) on the values; gaps survive."""
    if sigma_m < 0.0:
        raise DomainError("sigma_m must be non-negative")
    if sigma_m == 0.0:
        return series
    rng = np.random.default_rng(seed)
    noisy = series.values + rng.normal(0.0, sigma_m, size=len(series))
    return ParamSeries(times=series.times.copy(), values=noisy,
                       dt=series.dt, gaps=series.gaps.copy())


def simulate_gbm(spec: GBMSpec) -> np.ndarray:
    """Exact log-space GBM path of n_steps + 1 prices starting at S0."""
    rng = np.random.default_rng(spec.seed)
    xi = rng.standard_normal(spec.n_steps)
    log_inc = (spec.mu - 0.5 * spec.sigma ** 2) * spec.dt \
        + spec.sigma * math.sqrt(spec.dt) * xi
    path = np.empty(spec.n_steps + 1)
    path[0] = spec.s0
    path[1:] = spec.s0 * np.exp(np.cumsum(log_inc))
    return path


def simulate_market(n_companies: int, n_windows: int,
                    phi_process: LangevinSpec, theta: float, seed: int,
                    window_len: float = 600.0) -> MarketSim:
    """Inverse-gamma market driven by a stochastic tail parameter.

    Window t draws n_companies volume-prices from
    InverseGamma(phi(t), theta) and normalizes them by their mean; the
    clamped phi trajectory is returned for oracle comparisons.  Each
    window consumes an independent substream of the seed, so any window
    is reproducible on its own.
    """
    if n_companies < 1 or n_windows < 1:
        raise DomainError("n_companies and n_windows must be >= 1")
    if theta <= 0.0:
        raise DomainError("theta must be positive")
    proc = dataclasses.replace(phi_process, n_steps=n_windows)
    truth = simulate_langevin(proc)
    phis = np.maximum(truth.values, _MIN_MARKET_PHI)
    windows = []
    for t in range(n_windows):
        raw = dist.sample(ModelParams(ModelKind.INVERSE_GAMMA, float(phis[t]), theta),
                          n_companies, seed=[seed, t])
        mean_s = float(raw.mean())
        windows.append(SnapshotWindow(
            window_start=t * window_len,
            window_len=window_len,
            samples=raw / mean_s,
            mean_s=mean_s,
            std_s=float(raw.std()),
            n_companies=n_companies,
        ))
    times = np.arange(n_windows) * window_len
    return MarketSim(windows=windows,
                     truth=ParamSeries(times=times, values=phis, dt=1.0))
