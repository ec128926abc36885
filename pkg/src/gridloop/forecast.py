"""Load forecasting and residual diagnostics.

The in-loop utility forecaster is deliberately simple (persistence or
seasonal persistence). For detection, demand is modeled as a daily-seasonal
AR process: seasonally difference at period 24, fit AR(p) to the
differenced series by conditional least squares (no intercept), and
forecast by recursing the AR over the differences and re-adding the
level from 24 hours back. One-step-ahead residuals on the training window
give the noise scale sigma that calibrates the sequential detectors.

Diagnostics (sample ACF/PACF, Jarque-Bera, normal Q-Q coordinates) verify
the residuals are close enough to white noise for that calibration to be
honest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gridloop.normal import norm_ppf

__all__ = [
    "SeasonalARModel",
    "acf",
    "acf_band",
    "fit_seasonal_ar",
    "forecast",
    "jarque_bera",
    "make_oracle",
    "naive_forecast",
    "one_step_residuals",
    "pacf",
    "qq_points",
    "seasonal_naive_forecast",
]

SIGMA_FLOOR = 1e-6


def naive_forecast(history: np.ndarray) -> float:
    """Persistence: next value = last observed value."""
    if len(history) == 0:
        raise ValueError("invalid forecast: no history")
    return float(history[-1])


def seasonal_naive_forecast(history: np.ndarray, period: int = 24) -> float:
    """Next value = value one period ago (falls back to persistence early on)."""
    if len(history) == 0:
        raise ValueError("invalid forecast: no history")
    if len(history) >= period:
        return float(history[-period])
    return float(history[-1])


def make_oracle(truth: np.ndarray):
    """Forecaster that returns the true value (for tracking-limit studies).

    The returned callable maps a history of length t to truth[t].
    """
    truth = np.asarray(truth, dtype=float)

    def oracle(history: np.ndarray) -> float:
        return float(truth[len(history)])

    return oracle


@dataclass
class SeasonalARModel:
    """AR(p) over the period-differenced series.

    coeffs may be shorter than the requested order when degenerate training
    data forced a fallback to a smaller model (order 0 = pure seasonal
    persistence). sigma is the ddof=1 standard deviation of one-step
    training residuals, floored at 1e-6.
    """

    period: int
    order: int
    coeffs: np.ndarray
    sigma: float
    y_tail: np.ndarray  # last `period` training observations
    d_tail: np.ndarray  # last `order` training differences
    n_train: int


def fit_seasonal_ar(y, order: int = 2, period: int = 24) -> SeasonalARModel:
    """Fit by conditional least squares on the differenced series.

    Needs at least 3 periods plus `order` observations. If the normal
    equations are singular (e.g. a perfectly periodic series differences
    to all zeros) the order is reduced until they solve; order 0 always
    does.
    """
    y = np.asarray(y, dtype=float)
    if order < 0 or period < 1:
        raise ValueError("order must be >= 0 and period >= 1")
    if len(y) < 3 * period + order:
        raise ValueError(f"need at least {3 * period + order} observations, got {len(y)}")

    d = y[period:] - y[:-period]
    p = order
    while True:
        coeffs = _fit_ar(d, p)
        if coeffs is not None:
            break
        p -= 1

    if p == 0:
        resid = d
    else:
        cols = [d[p - 1 - j : len(d) - 1 - j] for j in range(p)]
        pred = np.column_stack(cols) @ coeffs
        resid = d[p:] - pred
    sigma = float(np.std(resid, ddof=1)) if len(resid) > 1 else 0.0
    return SeasonalARModel(
        period=period,
        order=p,
        coeffs=coeffs,
        sigma=max(sigma, SIGMA_FLOOR),
        y_tail=y[-period:].copy(),
        d_tail=d[len(d) - p :].copy() if p else np.empty(0),
        n_train=len(y),
    )


def _fit_ar(d: np.ndarray, p: int):
    """Least-squares AR(p) coefficients on d, or None if singular."""
    if p == 0:
        return np.empty(0)
    # row t predicts d[t] from d[t-1] ... d[t-p]
    X = np.column_stack([d[p - 1 - j : len(d) - 1 - j] for j in range(p)])
    target = d[p:]
    gram = X.T @ X
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > 1e12:
        return None
    try:
        coeffs = np.linalg.solve(gram, X.T @ target)
    except np.linalg.LinAlgError:
        return None
    return coeffs


def forecast(model: SeasonalARModel, steps: int) -> np.ndarray:
    """Multi-step forecast, substituting forecasts for unseen values.

    Differences recurse through the AR (forecast differences feed back in),
    and beyond one period ahead the level re-added is itself a forecast.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    p = model.order
    d_hist = list(model.d_tail)
    # levels at lag `period`: observed tail first, then our own forecasts
    levels = list(model.y_tail)
    out = np.empty(steps)
    for k in range(steps):
        d_hat = sum(model.coeffs[j] * d_hist[-1 - j] for j in range(p)) if p else 0.0
        y_hat = d_hat + levels[k]
        out[k] = y_hat
        d_hist.append(d_hat)
        levels.append(y_hat)
    return out


def one_step_residuals(model: SeasonalARModel, y) -> np.ndarray:
    """One-step-ahead in-sample residuals of `model` on a series.

    Passing the training series back reproduces the residuals whose
    spread defined model.sigma; diagnostics (acf, jarque_bera, qq_points)
    are meant to run on this output.
    """
    y = np.asarray(y, dtype=float)
    period, p = model.period, model.order
    if len(y) < period + p + 1:
        raise ValueError(f"need at least {period + p + 1} observations, got {len(y)}")
    d = y[period:] - y[:-period]
    if p == 0:
        return d.copy()
    cols = [d[p - 1 - j : len(d) - 1 - j] for j in range(p)]
    pred = np.column_stack(cols) @ model.coeffs
    return d[p:] - pred


# ---------------------------------------------------------------------------
# residual diagnostics

def _demeaned(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    c = x - x.mean()
    if np.allclose(c, 0.0):
        raise ValueError("degenerate residuals: zero variance")
    return c


def acf(x, nlags: int) -> np.ndarray:
    """Sample autocorrelation for lags 0..nlags (lag 0 is 1 by construction)."""
    c = _demeaned(x)
    denom = float(c @ c)
    n = len(c)
    if nlags >= n:
        raise ValueError("nlags must be smaller than the series length")
    out = np.empty(nlags + 1)
    for k in range(nlags + 1):
        out[k] = float(c[k:] @ c[: n - k]) / denom
    return out


def pacf(x, nlags: int) -> np.ndarray:
    """Partial autocorrelation via Durbin-Levinson; pacf[0] = 1, pacf[1] = acf[1]."""
    r = acf(x, nlags)
    out = np.empty(nlags + 1)
    out[0] = 1.0
    if nlags == 0:
        return out
    phi_prev = np.array([r[1]])
    out[1] = r[1]
    for k in range(2, nlags + 1):
        num = r[k] - phi_prev @ r[k - 1 : 0 : -1]
        den = 1.0 - phi_prev @ r[1:k]
        phi_kk = num / den
        phi = np.empty(k)
        phi[: k - 1] = phi_prev - phi_kk * phi_prev[::-1]
        phi[k - 1] = phi_kk
        out[k] = phi_kk
        phi_prev = phi
    return out


def acf_band(n: int) -> float:
    """Half-width of the white-noise 95% band for a length-n series."""
    return 1.96 / np.sqrt(n)


def jarque_bera(x) -> float:
    """JB normality statistic n/6 * (S^2 + (K-3)^2 / 4) from moment estimators."""
    c = _demeaned(x)
    n = len(c)
    m2 = float(np.mean(c**2))
    skew = float(np.mean(c**3)) / m2**1.5
    kurt = float(np.mean(c**4)) / m2**2
    return n / 6.0 * (skew**2 + 0.25 * (kurt - 3.0) ** 2)


def qq_points(x) -> tuple[np.ndarray, np.ndarray]:
    """Normal Q-Q coordinates: (theoretical quantiles, sorted standardized x).

    Theoretical quantiles are Phi^{-1}((i - 0.5) / n); x is standardized by
    its moment estimates (ddof = 0).
    """
    c = _demeaned(x)
    n = len(c)
    sd = float(np.sqrt(np.mean(c**2)))
    sample = np.sort(c / sd)
    theory = norm_ppf((np.arange(1, n + 1) - 0.5) / n)
    return theory, sample
