"""Sequential detectors over forecast residuals, plus feature building.

Both sequential detectors watch the one-step forecast residuals of the
aggregate load for a positive mean shift.

GLRT: the score at time t is the mean residual over the trailing window
(shorter prefix windows are used until the window fills); an alarm fires
when the score exceeds sqrt(sigma^2 / n) * Qinv(p_fa), the threshold that
holds the per-window false-alarm probability at p_fa for white residuals.

CUSUM: g_t = max(0, g_{t-1} + x_t - k) accumulates drift-corrected
evidence; crossing h raises an alarm and resets g. Times where the
pre-reset statistic sits at zero are candidate change points, which also
yields an interval-scored variant: on an alarm, every step since the last
candidate change point is marked attacked.

Supervised detection reuses the same residual-free series directly: each
row's features are the previous `lags` observations (strictly past, never
the current one), and training data is doubled with synthetic attacked
copies so the classifiers see both classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gridloop.normal import norm_isf

__all__ = [
    "CusumConfig",
    "CusumResult",
    "GlrtConfig",
    "GlrtResult",
    "build_training_set",
    "cusum_detect",
    "cusum_sweep",
    "glrt_detect",
    "glrt_sweep",
    "make_features",
    "sliding_means",
]

FEATURE_LAGS = 24


@dataclass(frozen=True)
class GlrtConfig:
    sigma: float
    window: int = 24
    p_fa: float = 0.05

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not 0.0 < self.p_fa < 1.0:
            raise ValueError("p_fa must lie strictly inside (0, 1)")


@dataclass
class GlrtResult:
    scores: np.ndarray
    thresholds: np.ndarray
    decisions: np.ndarray


def sliding_means(x, window: int) -> np.ndarray:
    """Trailing-window means; the first window-1 entries use prefixes."""
    x = np.asarray(x, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    csum = np.concatenate(([0.0], np.cumsum(x)))
    n = len(x)
    t = np.arange(n)
    lo = np.maximum(t - window + 1, 0)
    return (csum[t + 1] - csum[lo]) / (t + 1 - lo)


def glrt_detect(x, cfg: GlrtConfig) -> GlrtResult:
    """Window-mean detector with an exact-false-alarm threshold."""
    x = np.asarray(x, dtype=float)
    scores = sliding_means(x, cfg.window)
    n_eff = np.minimum(np.arange(len(x)) + 1, cfg.window)
    thresholds = np.sqrt(cfg.sigma**2 / n_eff) * norm_isf(cfg.p_fa)
    decisions = (scores > thresholds).astype(np.int8)
    return GlrtResult(scores=scores, thresholds=thresholds, decisions=decisions)


def glrt_sweep(x, sigma: float, window: int = 24, n_points: int = 101):
    """Decisions for a grid of false-alarm rates spanning [0, 1].

    Returns (p_fa grid, decisions matrix of shape (n_points, len(x))).
    The endpoints 0 and 1 give the never/always-alarm corners.
    """
    x = np.asarray(x, dtype=float)
    scores = sliding_means(x, window)
    n_eff = np.minimum(np.arange(len(x)) + 1, window)
    scale = np.sqrt(sigma**2 / n_eff)
    p_fas = np.linspace(0.0, 1.0, n_points)
    decisions = np.empty((n_points, len(x)), dtype=np.int8)
    for i, p in enumerate(p_fas):
        decisions[i] = scores > scale * norm_isf(p)
    return p_fas, decisions


@dataclass(frozen=True)
class CusumConfig:
    """Drift k defaults to sigma/2, alarm threshold h to 2*sigma."""

    sigma: float
    k: float | None = None
    h: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.effective_k < 0:
            raise ValueError("drift k must be non-negative")
        if self.effective_h <= 0:
            raise ValueError("threshold h must be positive")

    @property
    def effective_k(self) -> float:
        return 0.5 * self.sigma if self.k is None else self.k

    @property
    def effective_h(self) -> float:
        return 2.0 * self.sigma if self.h is None else self.h


@dataclass
class CusumResult:
    scores: np.ndarray  # pre-reset statistic g_t
    decisions: np.ndarray  # alarm at t (point-wise)
    interval_decisions: np.ndarray  # attacked interval per alarm
    change_candidates: np.ndarray  # times with pre-reset g_t == 0


def _cusum(x: np.ndarray, k: float, h: float):
    """One-sided CUSUM recursion; h may be 0 (alarm on any positive g)."""
    n = len(x)
    scores = np.empty(n)
    alarms = np.zeros(n, dtype=np.int8)
    intervals = np.zeros(n, dtype=np.int8)
    candidates = []
    g = 0.0
    last_zero = -1
    for t in range(n):
        g = max(0.0, g + x[t] - k)
        scores[t] = g
        if g == 0.0:
            candidates.append(t)
            last_zero = t
        elif g > h:
            alarms[t] = 1
            intervals[last_zero + 1 : t + 1] = 1
            g = 0.0
            last_zero = t
    return scores, alarms, intervals, np.asarray(candidates, dtype=np.int64)


def cusum_detect(x, cfg: CusumConfig) -> CusumResult:
    x = np.asarray(x, dtype=float)
    scores, alarms, intervals, candidates = _cusum(x, cfg.effective_k, cfg.effective_h)
    return CusumResult(
        scores=scores,
        decisions=alarms,
        interval_decisions=intervals,
        change_candidates=candidates,
    )


def cusum_sweep(
    x,
    sigma: float,
    k: float | None = None,
    n_points: int = 101,
    h_max_sigmas: float = 6.0,
    interval: bool = False,
):
    """Decisions over an alarm-threshold grid linspace(0, h_max_sigmas*sigma).

    h = 0 is allowed inside the sweep (it alarms on any positive g) even
    though user-facing configs require h > 0.
    """
    x = np.asarray(x, dtype=float)
    drift = 0.5 * sigma if k is None else k
    hs = np.linspace(0.0, h_max_sigmas * sigma, n_points)
    decisions = np.empty((n_points, len(x)), dtype=np.int8)
    for i, h in enumerate(hs):
        _, alarms, intervals, _ = _cusum(x, drift, h)
        decisions[i] = intervals if interval else alarms
    return hs, decisions


# ---------------------------------------------------------------------------
# supervised feature pipeline

def make_features(values, labels, lags: int = FEATURE_LAGS):
    """Lagged-window design matrix.

    Row for index t (t = lags .. n-1) holds values[t-lags .. t-1] -- only
    strictly past observations -- and is labeled labels[t]. Returns
    (X of shape (n - lags, lags), y).
    """
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    if lags < 1:
        raise ValueError("lags must be >= 1")
    if len(values) <= lags:
        raise ValueError(f"need more than {lags} observations")
    if labels.shape != values.shape:
        raise ValueError("values and labels must have equal length")
    X = np.lib.stride_tricks.sliding_window_view(values, lags)[:-1]
    return X.copy(), labels[lags:].copy()


def build_training_set(train_values, rng: np.random.Generator):
    """Double a nominal training series with a synthetically attacked copy.

    The copy is split into three equal parts carrying a ramp (step drawn
    uniform [2, 10]), a sudden shift (level uniform [50, 300]), and point
    spikes (five per day, each uniform [50, 300]; a trailing partial day
    gets a proportional count, at least one). The whole copy is labeled 1,
    the nominal half 0.
    """
    train = np.asarray(train_values, dtype=float)
    n = len(train)
    if n < 6:
        raise ValueError("training series too short to double")
    third = n // 3
    copy = train.copy()

    step = rng.uniform(2.0, 10.0)
    copy[:third] += step * np.arange(1, third + 1)

    level = rng.uniform(50.0, 300.0)
    copy[third : 2 * third] += level

    start = 2 * third
    while start < n:
        chunk = min(24, n - start)
        k = 5 if chunk == 24 else max(1, round(5 * chunk / 24))
        hours = rng.choice(chunk, size=k, replace=False)
        copy[start + np.sort(hours)] += rng.uniform(50.0, 300.0, size=k)
        start += chunk

    values = np.concatenate([train, copy])
    labels = np.concatenate([np.zeros(n, dtype=np.int8), np.ones(n, dtype=np.int8)])
    return values, labels
