"""Constant-mean Kriging estimator of the single-point fidelity surface.

The model treats the response as a stationary Gaussian process with mean mu
and power-exponential correlation

    Corr(x_i, x_j) = exp(-sum_h alpha_h |x_ih - x_jh|^p_h),  alpha_h >= 0,
    p_h in [1, 2],

fitted by maximizing the concentrated likelihood (mu and sigma^2 replaced by
their analytic optima) with Nelder-Mead restarts over (log alpha, p).
Coordinates are rescaled to the unit square before distances are taken so
the alpha values are comparable across dimensions.  The predictor is the
best linear unbiased interpolator

    yhat(x) = mu_hat + r(x)' R^-1 (y - 1 mu_hat).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .neldermead import nelder_mead

DEFAULT_NUGGET = 1e-10
LOG_ALPHA_RANGE = (-6.0, 6.0)
POWER_RANGE = (1.0, 2.0)
# Sample pairs closer than this fraction of the scaled region diagonal make
# the correlation matrix numerically singular regardless of the nugget.
SEPARATION_FLOOR = 1e-6
# Reject fitted correlation matrices whose Cholesky diagonal spans more than
# ~1.7 decades (condition number beyond ~2.5e3); the interpolation and GLS-mean
# tolerances are unreachable past that point.
COND_GUARD = 2e-2


class DegenerateDesignError(ValueError):
    """Sample set contains (near-)duplicate points."""


class FitError(RuntimeError):
    """Correlation-parameter likelihood optimization failed."""


class DegenerateValidationError(ValueError):
    """Cross-validation is undefined (zero variance in the true values)."""


@dataclass(frozen=True)
class CorrelationParams:
    """Per-dimension scales and exponents of the power-exponential kernel."""

    alpha: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        power = np.atleast_1d(np.asarray(self.power, dtype=float))
        if alpha.shape != power.shape or alpha.ndim != 1:
            raise ValueError("alpha and power must be 1-d and the same length")
        if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
            raise ValueError("alpha entries must be finite and >= 0")
        if np.any(power < POWER_RANGE[0]) or np.any(power > POWER_RANGE[1]):
            raise ValueError("power entries must lie in [1, 2]")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "power", power)

    @property
    def k(self) -> int:
        return self.alpha.size


def correlation(x_i, x_j, params: CorrelationParams) -> float:
    """Kernel value for one pair of points (already in scaled coordinates)."""
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    d = np.sum(params.alpha * np.abs(x_i - x_j) ** params.power)
    return float(np.exp(-d))


def _cross_corr(a, b, params: CorrelationParams):
    """Kernel matrix between scaled point sets a (m, k) and b (n, k)."""
    diff = np.abs(a[:, None, :] - b[None, :, :])
    d = np.sum(params.alpha * diff**params.power, axis=-1)
    return np.exp(-d)


def jittered_grid(region, n: int, rng: np.random.Generator, jitter: float = 1.0):
    """n sample points on a sqrt(n) x sqrt(n) cell grid with uniform jitter.

    Each point is its cell center displaced by an independent uniform offset
    of up to ``jitter`` half-cells per axis, so every point stays inside its
    cell.  ``jitter=0`` gives exact cell centers (testing hook).
    """
    region = np.asarray(region, dtype=float)
    if region.ndim != 2 or region.shape[1] != 2:
        raise ValueError("region must be a (k, 2) array of (low, high) rows")
    if np.any(region[:, 1] <= region[:, 0]):
        raise ValueError("region is empty")
    m = math.isqrt(n)
    if m * m != n:
        raise ValueError(f"sample count {n} is not a perfect square")
    k = region.shape[0]
    if k != 2:
        raise ValueError("jittered_grid supports 2-d regions")
    span = region[:, 1] - region[:, 0]
    cell = span / m
    centers = (np.arange(m) + 0.5)[:, None] * cell[None, :] + region[:, 0]
    offsets = rng.uniform(-0.5, 0.5, size=(m, m, k)) * jitter * cell
    pts = np.empty((m, m, k))
    pts[..., 0] = centers[:, None, 0]
    pts[..., 1] = centers[None, :, 1]
    pts = pts + offsets
    return pts.reshape(n, k)


def _solve_lower(l_mat, b):
    # n is tiny here; a generic solve on the triangular factor is fine.
    return np.linalg.solve(l_mat, b)


class KrigingModel:
    """Fitted constant-mean Gaussian-process interpolator.

    Attributes mirror the estimation quantities: ``samples`` (n, k) in
    original units, ``values`` (n,), ``params``, ``mu_hat``, ``sigma2_hat``,
    the scaling ``bounds`` (k, 2) and the ``nugget`` added to the diagonal of
    the correlation matrix before factorization.
    """

    def __init__(self, samples, values, params: CorrelationParams, bounds, nugget=DEFAULT_NUGGET, _factor=None):
        samples = np.asarray(samples, dtype=float)
        values = np.asarray(values, dtype=float).ravel()
        bounds = np.asarray(bounds, dtype=float)
        if samples.ndim != 2 or samples.shape[0] != values.size:
            raise ValueError("samples must be (n, k) matching values")
        if bounds.shape != (samples.shape[1], 2):
            raise ValueError("bounds must be (k, 2)")
        if np.any(bounds[:, 1] <= bounds[:, 0]):
            raise ValueError("bounds are empty along some dimension")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values contain non-finite entries")
        self.samples = samples
        self.values = values
        self.params = params
        self.bounds = bounds
        self.nugget = float(nugget)
        if _factor is None:
            scaled = self._scale(samples)
            corr = _cross_corr(scaled, scaled, params)
            corr[np.diag_indices_from(corr)] += self.nugget
            chol = np.linalg.cholesky(corr)
            z_one = _solve_lower(chol, np.ones(values.size))
            _factor = (scaled, chol, z_one)
        self._scaled, self._chol, self._z_one = _factor
        if np.ptp(values) == 0.0:
            # Constant responses: the predictor is identically the constant.
            self.mu_hat = float(values[0])
            self.sigma2_hat = 0.0
            self._weights = np.zeros(values.size)
        else:
            z_y = _solve_lower(self._chol, values)
            denom = float(self._z_one @ self._z_one)
            self.mu_hat = float(self._z_one @ z_y) / denom
            z_resid = z_y - self.mu_hat * self._z_one
            self.sigma2_hat = float(z_resid @ z_resid) / values.size
            # w = R^-1 (y - 1 mu_hat), the y-dependent half of the predictor.
            self._weights = _solve_lower(self._chol.T, z_resid)

    @property
    def n(self) -> int:
        return self.values.size

    def _scale(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.bounds[:, 0]) / (self.bounds[:, 1] - self.bounds[:, 0])

    def with_values(self, values) -> "KrigingModel":
        """Same sample positions and correlation structure, new responses."""
        return KrigingModel(
            self.samples,
            values,
            self.params,
            self.bounds,
            self.nugget,
            _factor=(self._scaled, self._chol, self._z_one),
        )

    def predict(self, x):
        """BLUP prediction at one point (k,) or a batch (m, k)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = self._scale(np.atleast_2d(x))
        r = _cross_corr(pts, self._scaled, self.params)
        out = self.mu_hat + r @ self._weights
        return float(out[0]) if single else out

    def predict_grid(self, deltas, kappas):
        """Predictions on the product grid, shape (len(deltas), len(kappas)).

        The kernel factorizes over dimensions, so the grid prediction needs
        only one kernel block per axis instead of one per grid point.
        """
        sd = (np.asarray(deltas, float) - self.bounds[0, 0]) / (
            self.bounds[0, 1] - self.bounds[0, 0]
        )
        sk = (np.asarray(kappas, float) - self.bounds[1, 0]) / (
            self.bounds[1, 1] - self.bounds[1, 0]
        )
        pa = self.params
        a = np.exp(-pa.alpha[0] * np.abs(sd[:, None] - self._scaled[None, :, 0]) ** pa.power[0])
        b = np.exp(-pa.alpha[1] * np.abs(sk[:, None] - self._scaled[None, :, 1]) ** pa.power[1])
        return self.mu_hat + a @ (b * self._weights).T

    def to_dict(self) -> dict:
        return {
            "samples": self.samples.tolist(),
            "values": self.values.tolist(),
            "alpha": self.params.alpha.tolist(),
            "power": self.params.power.tolist(),
            "mu_hat": self.mu_hat,
            "sigma2_hat": self.sigma2_hat,
            "bounds": self.bounds.tolist(),
            "nugget": self.nugget,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "KrigingModel":
        return cls(
            np.asarray(data["samples"], dtype=float),
            np.asarray(data["values"], dtype=float),
            CorrelationParams(np.asarray(data["alpha"]), np.asarray(data["power"])),
            np.asarray(data["bounds"], dtype=float),
            nugget=data.get("nugget", DEFAULT_NUGGET),
        )

    @classmethod
    def loads(cls, text: str) -> "KrigingModel":
        return cls.from_dict(json.loads(text))


def predict(model: KrigingModel, x):
    return model.predict(x)


def _concentrated_nll(theta, scaled, values, nugget):
    """Negative concentrated log-likelihood over (log alpha, p)."""
    k = scaled.shape[1]
    n = values.size
    log_alpha = theta[:k]
    power = theta[k:]
    penalty = 0.0
    lo, hi = LOG_ALPHA_RANGE
    penalty += 1e3 * float(np.sum(np.clip(log_alpha - hi, 0, None) ** 2))
    penalty += 1e3 * float(np.sum(np.clip(lo - log_alpha, 0, None) ** 2))
    penalty += 1e3 * float(np.sum(np.clip(power - POWER_RANGE[1], 0, None) ** 2))
    penalty += 1e3 * float(np.sum(np.clip(POWER_RANGE[0] - power, 0, None) ** 2))
    params = CorrelationParams(
        np.exp(np.clip(log_alpha, lo, hi)), np.clip(power, *POWER_RANGE)
    )
    corr = _cross_corr(scaled, scaled, params)
    corr[np.diag_indices_from(corr)] += nugget
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        return 1e12 + penalty
    diag = np.diag(chol)
    # Near-singular correlation (alpha -> 0 sends R toward the ones matrix)
    # makes the GLS mean and the interpolation weights numerically garbage;
    # keep the fit inside the well-conditioned region.
    if diag.min() < COND_GUARD * diag.max():
        return 1e12 + penalty
    z_one = _solve_lower(chol, np.ones(n))
    z_y = _solve_lower(chol, values)
    mu = float(z_one @ z_y) / float(z_one @ z_one)
    z_resid = z_y - mu * z_one
    sigma2 = float(z_resid @ z_resid) / n
    if sigma2 <= 0 or not np.isfinite(sigma2):
        return 1e12 + penalty
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    nll = 0.5 * (n * np.log(2.0 * np.pi * sigma2) + log_det + n)
    return nll + penalty


def fit(
    samples,
    values,
    rng: np.random.Generator | None = None,
    bounds=None,
    n_restarts: int = 5,
    nugget: float = DEFAULT_NUGGET,
) -> KrigingModel:
    """Fit correlation parameters by maximum likelihood and build the model.

    ``bounds`` gives the (k, 2) axis ranges used to rescale coordinates; it
    defaults to the sample bounding box.  Raises DegenerateDesignError for
    near-duplicate samples and FitError when every restart fails.
    """
    samples = np.asarray(samples, dtype=float)
    values = np.asarray(values, dtype=float).ravel()
    if samples.ndim != 2 or samples.shape[0] != values.size:
        raise ValueError("samples must be (n, k) matching values")
    n, k = samples.shape
    if n < 3:
        raise ValueError("at least 3 samples are required")
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples contain non-finite entries")
    if not np.all(np.isfinite(values)):
        raise ValueError("sample values contain non-finite entries")
    if rng is None:
        rng = np.random.default_rng(0)
    if bounds is None:
        bounds = np.column_stack([samples.min(axis=0), samples.max(axis=0)])
    bounds = np.asarray(bounds, dtype=float)
    if np.any(bounds[:, 1] <= bounds[:, 0]):
        raise ValueError("bounds are empty along some dimension")

    scaled = (samples - bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])
    diff = scaled[:, None, :] - scaled[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    dist[np.diag_indices_from(dist)] = np.inf
    floor = SEPARATION_FLOOR * np.sqrt(k)
    if np.min(dist) < floor:
        raise DegenerateDesignError(
            f"sample pair closer than {floor:.1e} of the scaled region"
        )

    default_params = CorrelationParams(np.ones(k), np.full(k, 2.0))
    if np.ptp(values) == 0.0:
        # Constant responses: the predictor is identically mu_hat and the
        # likelihood carries no information about (alpha, p).
        return KrigingModel(samples, values, default_params, bounds, nugget)

    best_theta = None
    best_nll = np.inf
    steps = np.concatenate([np.full(k, 0.6), np.full(k, 0.05)])
    for _ in range(n_restarts):
        theta0 = np.concatenate(
            [rng.uniform(*LOG_ALPHA_RANGE, size=k), rng.uniform(*POWER_RANGE, size=k)]
        )
        result = nelder_mead(
            lambda th: _concentrated_nll(th, scaled, values, nugget),
            theta0,
            steps,
            f_tol=1e-7,
            max_iter=500,
        )
        if result.fun < best_nll:
            best_nll = result.fun
            best_theta = result.x
    if best_theta is None or best_nll >= 1e11:
        raise FitError("likelihood optimization failed on every restart")
    params = CorrelationParams(
        np.exp(np.clip(best_theta[:k], *LOG_ALPHA_RANGE)),
        np.clip(best_theta[k:], *POWER_RANGE),
    )
    return KrigingModel(samples, values, params, bounds, nugget)


def loo_validate(model: KrigingModel) -> float:
    """Leave-one-out slope of predicted-vs-true under the fitted (alpha, p).

    Each sample is predicted from the remaining n-1 samples with the parent
    model's correlation parameters; the returned value is the ordinary
    least-squares slope (with intercept) of the predictions against the true
    values.
    """
    n = model.n
    if n < 3:
        raise ValueError("at least 3 samples are required")
    truth = model.values
    if np.ptp(truth) == 0.0:
        raise DegenerateValidationError("true values have zero variance")
    preds = np.empty(n)
    idx = np.arange(n)
    for i in range(n):
        keep = idx != i
        sub = KrigingModel(
            model.samples[keep],
            truth[keep],
            model.params,
            model.bounds,
            model.nugget,
        )
        preds[i] = sub.predict(model.samples[i])
    x_center = truth - truth.mean()
    slope = float(x_center @ (preds - preds.mean())) / float(x_center @ x_center)
    return slope


def surrogate_objective(model: KrigingModel, grid) -> float:
    """Noise-weighted average of clipped predictions over the grid.

    Uses M * N predictor calls and no true-function calls; raw predictions
    are clipped to [0, 1] because the underlying response is a fidelity.
    """
    pred = np.clip(model.predict_grid(grid.deltas, grid.kappas), 0.0, 1.0)
    return float(np.sum(grid.weights * pred))
