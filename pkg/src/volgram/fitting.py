"""Least-squares fitting of model CDFs to per-window empirical CDFs.

The optimizer is a damped Gauss-Newton iteration with a Levenberg-style
multiplier on the normal-equation diagonal and a central-difference
Jacobian.  Parameter errors come from the usual linearization
``cov = (J^T J)^{-1} rss / (m - 2)``; the relative errors
``stderr(phi)/|phi|`` and ``stderr(theta)/|theta|`` are the per-window
quality measure that the cross-model ranking aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .distributions import ALL_KINDS, ModelKind, ModelParams
from .errors import NoConvergedFits, TooFewSamples, VolgramError

_PARAM_FLOOR = 1e-12
_STEP_TOL = 1e-9
_GRAD_TOL = 1e-10
_MAX_ITER = 200
_MAX_CLAMPS = 20
_LAMBDA_INIT = 1e-3
_LAMBDA_MAX = 1e12


@dataclass(frozen=True)
class EmpiricalCDF:
    """Sorted sample values with plotting-position probabilities."""
    s: np.ndarray
    f: np.ndarray
    n: int


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    rel_err_phi: float
    rel_err_theta: float
    rss: float
    converged: bool
    iterations: int
    message: str = ""


@dataclass(frozen=True)
class ModelErrorStats:
    avg_rel_err_phi: float
    std_rel_err_phi: float
    avg_rel_err_theta: float
    std_rel_err_theta: float
    n_converged: int
    n_failed: int
    hist_phi: tuple[np.ndarray, np.ndarray]
    hist_theta: tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class ErrorSummary:
    per_model: dict[ModelKind, ModelErrorStats]
    n_windows: int
    n_failed: int


def empirical_cdf(samples) -> EmpiricalCDF:
    """Empirical CDF with positions F_k = (k - 1/2)/n, k = 1..n.

    Tied sample values are collapsed to a single point carrying the
    largest position, so F stays strictly increasing and never touches
    0 or 1.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size < 10:
        raise TooFewSamples(f"need at least 10 samples, got {arr.size}")
    s = np.sort(arr)
    n = s.size
    f = (np.arange(1, n + 1) - 0.5) / n
    keep = np.r_[s[1:] != s[:-1], True]
    return EmpiricalCDF(s=s[keep], f=f[keep], n=n)


def _lower_bounds(kind: ModelKind) -> np.ndarray:
    if kind is ModelKind.LOG_NORMAL:
        return np.array([-np.inf, _PARAM_FLOOR])
    return np.array([_PARAM_FLOOR, _PARAM_FLOOR])


def _residual(kind: ModelKind, p: np.ndarray, ecdf: EmpiricalCDF,
              sqrt_w: np.ndarray | None) -> np.ndarray:
    model = dist.cdf(ModelParams(kind, float(p[0]), float(p[1])), ecdf.s)
    r = np.asarray(model) - ecdf.f
    return r * sqrt_w if sqrt_w is not None else r


def _jacobian(kind: ModelKind, p: np.ndarray, ecdf: EmpiricalCDF,
              sqrt_w: np.ndarray | None, lb: np.ndarray) -> np.ndarray:
    # central differences, step max(1e-6 |p|, 1e-9); probes below the
    # domain floor are clamped and the actual span divides the difference
    h = np.maximum(1e-6 * np.abs(p), 1e-9)
    hi = p + h
    lo = np.maximum(p - h, lb)
    probes_phi = np.array([hi[0], lo[0], p[0], p[0]])
    probes_theta = np.array([p[1], p[1], hi[1], lo[1]])
    vals = dist.cdf_grid(kind, probes_phi, probes_theta, ecdf.s)
    jac = np.column_stack([
        (vals[0] - vals[1]) / (hi[0] - lo[0]),
        (vals[2] - vals[3]) / (hi[1] - lo[1]),
    ])
    if sqrt_w is not None:
        jac *= sqrt_w[:, None]
    return jac


def fit_cdf(kind: ModelKind, ecdf: EmpiricalCDF, guess: ModelParams,
            weighted: bool = False) -> FitResult:
    """Fit one model's CDF to an empirical CDF.

    Converges when the relative parameter step drops below 1e-9 or the
    gradient norm below 1e-10, capped at 200 iterations.  A step that
    leaves the parameter domain is clamped; twenty consecutive clamped
    steps abort the fit.  Singular normal equations are reported in the
    result rather than raised.
    """
    if guess.kind is not kind:
        raise VolgramError(f"guess is for {guess.kind}, expected {kind}")
    if not guess.is_valid():
        raise VolgramError(f"initial guess outside the {kind} domain")
    m = ecdf.s.size
    if m < 3:
        return FitResult(guess, np.inf, np.inf, np.inf, False, 0,
                         "fewer than 3 distinct CDF points")
    sqrt_w = None
    if weighted:
        sqrt_w = 1.0 / np.sqrt(ecdf.f * (1.0 - ecdf.f))
    lb = _lower_bounds(kind)
    p = np.array([guess.phi, guess.theta], dtype=float)
    r = _residual(kind, p, ecdf, sqrt_w)
    rss = float(r @ r)
    lam = _LAMBDA_INIT
    converged = False
    message = "iteration cap reached"
    clamp_streak = 0
    jac = None
    iters = 0
    for iters in range(1, _MAX_ITER + 1):
        jac = _jacobian(kind, p, ecdf, sqrt_w, lb)
        grad = jac.T @ r
        if float(np.linalg.norm(grad)) < _GRAD_TOL:
            converged = True
            message = "gradient norm below tolerance"
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        if not np.all(np.isfinite(jtj)) or np.any(diag <= 0.0):
            message = "singular Jacobian"
            break
        accepted = False
        while lam <= _LAMBDA_MAX:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                message = "singular Jacobian"
                break
            trial = p + step
            clamped = np.any(trial < lb)
            trial = np.maximum(trial, lb)
            r_trial = _residual(kind, trial, ecdf, sqrt_w)
            rss_trial = float(r_trial @ r_trial)
            if np.isfinite(rss_trial) and rss_trial <= rss:
                rel_step = float(np.max(np.abs(trial - p)
                                        / np.maximum(np.abs(p), _PARAM_FLOOR)))
                p, r, rss = trial, r_trial, rss_trial
                lam = max(lam / 10.0, 1e-12)
                accepted = True
                clamp_streak = clamp_streak + 1 if clamped else 0
                if clamp_streak >= _MAX_CLAMPS:
                    message = "domain escape: step clamping repeated"
                    break
                if rel_step < _STEP_TOL:
                    converged = True
                    message = "parameter step below tolerance"
                break
            lam *= 10.0
        if converged or clamp_streak >= _MAX_CLAMPS or message == "singular Jacobian":
            break
        if not accepted:
            message = "damping exhausted without improvement"
            break
    params = ModelParams(kind, float(p[0]), float(p[1]))
    rel_phi = rel_theta = np.inf
    if jac is not None and m > 2:
        jtj = jac.T @ jac
        try:
            cov = np.linalg.inv(jtj) * rss / (m - 2)
            se = np.sqrt(np.maximum(np.diag(cov), 0.0))
            rel_phi = float(se[0] / max(abs(p[0]), _PARAM_FLOOR))
            rel_theta = float(se[1] / max(abs(p[1]), _PARAM_FLOOR))
        except np.linalg.LinAlgError:
            converged = False
            message = "singular Jacobian"
    return FitResult(params, rel_phi, rel_theta, rss, converged, iters, message)


def fit_window_all_models(window, weighted: bool = False,
                          kinds: tuple[ModelKind, ...] = ALL_KINDS,
                          ) -> dict[ModelKind, FitResult]:
    """Independent fits of the requested models to one window.

    Accepts a SnapshotWindow or a bare sample array.  Per-model failures
    (bad guess, non-convergence) are embedded in the returned results;
    only an unusable sample set raises.
    """
    samples = getattr(window, "samples", window)
    ecdf = empirical_cdf(samples)
    out: dict[ModelKind, FitResult] = {}
    for kind in kinds:
        try:
            guess = dist.initial_guess(kind, samples)
            out[kind] = fit_cdf(kind, ecdf, guess, weighted=weighted)
        except VolgramError as err:
            fallback = ModelParams(kind, np.nan, np.nan)
            out[kind] = FitResult(fallback, np.inf, np.inf, np.inf,
                                  False, 0, str(err))
    return out


def error_summary(results: list[dict[ModelKind, FitResult]],
                  hist_bins: int = 64) -> ErrorSummary:
    """Average/std of the relative parameter errors per model, over the
    converged fits, with histogram arrays for the error distributions."""
    if not results:
        raise NoConvergedFits("no fit results to summarize")
    kinds = [k for k in ALL_KINDS if any(k in row for row in results)]
    per_model: dict[ModelKind, ModelErrorStats] = {}
    total_failed = 0
    for kind in kinds:
        rows = [row[kind] for row in results if kind in row]
        good = [fr for fr in rows if fr.converged]
        n_failed = len(rows) - len(good)
        total_failed += n_failed
        if not good:
            raise NoConvergedFits(f"model {kind} has no converged fits")
        rp = np.array([fr.rel_err_phi for fr in good])
        rt = np.array([fr.rel_err_theta for fr in good])
        hist_phi = np.histogram(rp, bins=hist_bins)
        hist_theta = np.histogram(rt, bins=hist_bins)
        per_model[kind] = ModelErrorStats(
            avg_rel_err_phi=float(rp.mean()),
            std_rel_err_phi=float(rp.std()),
            avg_rel_err_theta=float(rt.mean()),
            std_rel_err_theta=float(rt.std()),
            n_converged=len(good),
            n_failed=n_failed,
            hist_phi=(hist_phi[1], hist_phi[0]),
            hist_theta=(hist_theta[1], hist_theta[0]),
        )
    return ErrorSummary(per_model=per_model, n_windows=len(results),
                        n_failed=total_failed)
