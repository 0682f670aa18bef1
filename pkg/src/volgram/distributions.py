"""The four bi-parametric volume-price models.

Each model carries a shape-like parameter ``phi`` and a scale-like
parameter ``theta`` (for the log-normal, ``phi`` is the log-mean).  PDFs
are evaluated in log space and exponentiated at the end, which keeps the
inverse-gamma factor exp(-theta/s) finite for s near zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, DomainError, TooFewSamples
from .special_functions import erf, ln_gamma, reg_inc_gamma_lower, reg_inc_gamma_upper

_LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)


class ModelKind(enum.Enum):
    GAMMA = "gamma"
    INVERSE_GAMMA = "inverse-gamma"
    LOG_NORMAL = "log-normal"
    WEIBULL = "weibull"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ModelParams:
    kind: ModelKind
    phi: float
    theta: float

    def is_valid(self) -> bool:
        if not (math.isfinite(self.phi) and math.isfinite(self.theta)):
            return False
        if self.theta <= 0.0:
            return False
        if self.kind is ModelKind.LOG_NORMAL:
            return True
        return self.phi > 0.0


@dataclass(frozen=True)
class Moments:
    """Analytic mean/variance; ``None`` marks a moment that does not exist."""
    mean: float | None
    variance: float | None


def _check_params(params: ModelParams) -> None:
    if not params.is_valid():
        raise DomainError(f"invalid parameters for {params.kind}: "
                          f"phi={params.phi}, theta={params.theta}")


def _check_support(s: np.ndarray) -> None:
    if np.any(~np.isfinite(s)) or np.any(s <= 0.0):
        raise DomainError("model support is s > 0")


def pdf(params: ModelParams, s):
    """Probability density at s > 0."""
    _check_params(params)
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    _check_support(arr)
    phi, theta = params.phi, params.theta
    log_s = np.log(arr)
    if params.kind is ModelKind.GAMMA:
        log_pdf = (phi - 1.0) * log_s - arr / theta - phi * math.log(theta) - ln_gamma(phi)
    elif params.kind is ModelKind.INVERSE_GAMMA:
        log_pdf = phi * math.log(theta) - ln_gamma(phi) - (phi + 1.0) * log_s - theta / arr
    elif params.kind is ModelKind.LOG_NORMAL:
        z = (log_s - phi) / theta
        log_pdf = -log_s - math.log(theta) - _LOG_SQRT_TWO_PI - 0.5 * z * z
    else:
        ratio_pow = np.exp(phi * (log_s - math.log(theta)))
        log_pdf = (math.log(phi) - phi * math.log(theta)
                   + (phi - 1.0) * log_s - ratio_pow)
    out = np.exp(log_pdf)
    return float(out) if scalar else out


def cdf(params: ModelParams, s):
    """Cumulative probability at s > 0.

    Gamma: P(phi, s/theta).  Inverse gamma: Q(phi, theta/s).
    Log-normal: (1 + erf((ln s - phi) / (theta sqrt(2)))) / 2.
    Weibull: 1 - exp(-(s/theta)^phi).
    """
    _check_params(params)
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    _check_support(arr)
    phi, theta = params.phi, params.theta
    if params.kind is ModelKind.GAMMA:
        out = reg_inc_gamma_lower(phi, arr / theta)
    elif params.kind is ModelKind.INVERSE_GAMMA:
        out = reg_inc_gamma_upper(phi, theta / arr)
    elif params.kind is ModelKind.LOG_NORMAL:
        out = 0.5 * (1.0 + np.asarray(erf((np.log(arr) - phi) / (theta * math.sqrt(2.0)))))
    else:
        out = 1.0 - np.exp(-np.exp(phi * (np.log(arr) - math.log(theta))))
    out = np.asarray(out)
    return float(out) if scalar else out


def cdf_grid(kind: ModelKind, phis, thetas, s) -> np.ndarray:
    """CDF of one model at several parameter pairs over a common grid.

    Returns an array of shape (len(phis), len(s)).  This is the bulk
    entry point the fitter uses for finite-difference probes.
    """
    phi_col = np.asarray(phis, dtype=float).reshape(-1, 1)
    theta_col = np.asarray(thetas, dtype=float).reshape(-1, 1)
    if phi_col.shape != theta_col.shape:
        raise DomainError("phis and thetas must have equal length")
    if np.any(theta_col <= 0.0) or (kind is not ModelKind.LOG_NORMAL
                                    and np.any(phi_col <= 0.0)):
        raise DomainError(f"invalid parameters for {kind}")
    arr = np.asarray(s, dtype=float).reshape(1, -1)
    _check_support(arr)
    if kind is ModelKind.GAMMA:
        return np.asarray(reg_inc_gamma_lower(phi_col, arr / theta_col))
    if kind is ModelKind.INVERSE_GAMMA:
        return np.asarray(reg_inc_gamma_upper(phi_col, theta_col / arr))
    if kind is ModelKind.LOG_NORMAL:
        z = (np.log(arr) - phi_col) / (theta_col * math.sqrt(2.0))
        return 0.5 * (1.0 + np.asarray(erf(z)))
    return 1.0 - np.exp(-np.exp(phi_col * (np.log(arr) - np.log(theta_col))))


def analytic_moments(params: ModelParams) -> Moments:
    """Mean and variance where they exist (inverse-gamma moments require
    phi > 1 and phi > 2 respectively)."""
    _check_params(params)
    phi, theta = params.phi, params.theta
    if params.kind is ModelKind.GAMMA:
        return Moments(phi * theta, phi * theta * theta)
    if params.kind is ModelKind.INVERSE_GAMMA:
        mean = theta / (phi - 1.0) if phi > 1.0 else None
        var = (theta * theta / ((phi - 1.0) ** 2 * (phi - 2.0))
               if phi > 2.0 else None)
        return Moments(mean, var)
    if params.kind is ModelKind.LOG_NORMAL:
        mean = math.exp(phi + 0.5 * theta * theta)
        var = (math.exp(theta * theta) - 1.0) * math.exp(2.0 * phi + theta * theta)
        return Moments(mean, var)
    g1 = math.exp(ln_gamma(1.0 + 1.0 / phi))
    g2 = math.exp(ln_gamma(1.0 + 2.0 / phi))
    return Moments(theta * g1, theta * theta * (g2 - g1 * g1))


def _gamma_draws(rng: np.random.Generator, shape: float, n: int) -> np.ndarray:
    """Unit-scale gamma variates by squeeze-based rejection.

    Shapes below one are boosted: draw from shape+1 and multiply by
    U^(1/shape).
    """
    boosted = shape < 1.0
    d = (shape + 1.0 if boosted else shape) - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        m = int(need * 1.2) + 16
        z = rng.standard_normal(m)
        u = rng.random(m)
        v = (1.0 + c * z) ** 3
        pos = v > 0.0
        logv = np.log(np.where(pos, v, 1.0))
        accept = pos & (
            (u < 1.0 - 0.0331 * z ** 4)
            | (np.log(u) < 0.5 * z * z + d * (1.0 - v + logv))
        )
        got = d * v[accept]
        take = min(got.size, need)
        out[filled:filled + take] = got[:take]
        filled += take
    if boosted:
        out *= rng.random(n) ** (1.0 / shape)
    return out


def sample(params: ModelParams, n: int, seed) -> np.ndarray:
    """n deterministic draws from the model, all strictly positive.

    ``seed`` is anything ``numpy.random.default_rng`` accepts; callers
    building substreams pass sequences like ``[seed, stream]``.
    """
    _check_params(params)
    if n < 1:
        raise DomainError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    phi, theta = params.phi, params.theta
    if params.kind is ModelKind.GAMMA:
        return theta * _gamma_draws(rng, phi, n)
    if params.kind is ModelKind.INVERSE_GAMMA:
        # reciprocal of Gamma(phi, scale 1/theta)
        return theta / _gamma_draws(rng, phi, n)
    if params.kind is ModelKind.LOG_NORMAL:
        return np.exp(phi + theta * rng.standard_normal(n))
    return theta * rng.standard_exponential(n) ** (1.0 / phi)


def _plotting_positions(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # (k - 1/2)/n positions, ties collapsed to the largest F
    s = np.sort(samples)
    n = s.size
    f = (np.arange(1, n + 1) - 0.5) / n
    keep = np.r_[s[1:] != s[:-1], True]
    return s[keep], f[keep]


def initial_guess(kind: ModelKind, samples) -> ModelParams:
    """Moment-based starting point for the CDF fit.

    The Weibull guess regresses ln(-ln(1-F)) on ln s over the empirical
    CDF instead of inverting moments, which would need a root solve.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size < 10:
        raise TooFewSamples(f"need at least 10 samples, got {arr.size}")
    _check_support(arr)
    m = float(arr.mean())
    v = float(arr.var())
    if v <= 0.0:
        raise DegenerateSample("sample variance is zero")
    if kind is ModelKind.GAMMA:
        return ModelParams(kind, m * m / v, v / m)
    if kind is ModelKind.INVERSE_GAMMA:
        phi = m * m / v + 2.0
        return ModelParams(kind, phi, m * (phi - 1.0))
    if kind is ModelKind.LOG_NORMAL:
        logs = np.log(arr)
        spread = float(logs.std())
        if spread <= 0.0:
            raise DegenerateSample("log-sample variance is zero")
        return ModelParams(kind, float(logs.mean()), spread)
    s, f = _plotting_positions(arr)
    y = np.log(-np.log1p(-f))
    x = np.log(s)
    xm, ym = x.mean(), y.mean()
    denom = float(((x - xm) ** 2).sum())
    if denom <= 0.0:
        raise DegenerateSample("sample spread too small for the Weibull regression")
    slope = float(((x - xm) * (y - ym)).sum()) / denom
    intercept = ym - slope * xm
    return ModelParams(kind, slope, math.exp(-intercept / slope))


ALL_KINDS = (ModelKind.GAMMA, ModelKind.INVERSE_GAMMA,
             ModelKind.LOG_NORMAL, ModelKind.WEIBULL)
