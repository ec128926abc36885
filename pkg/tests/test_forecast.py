import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridloop.forecast import (
    SeasonalARModel,
    acf,
    acf_band,
    fit_seasonal_ar,
    forecast,
    jarque_bera,
    make_oracle,
    naive_forecast,
    one_step_residuals,
    pacf,
    qq_points,
    seasonal_naive_forecast,
)

# ---------------------------------------------------------------------------
# simple forecasters

def test_naive_is_persistence():
    assert naive_forecast(np.array([1.0, 2.0, 3.0])) == 3.0
    with pytest.raises(ValueError, match="no history"):
        naive_forecast(np.array([]))


def test_seasonal_naive():
    y = np.arange(30.0)
    assert seasonal_naive_forecast(y) == y[-24]
    assert seasonal_naive_forecast(y[:10]) == y[9]  # early fallback


def test_oracle_indexes_by_history_length():
    truth = np.array([5.0, 6.0, 7.0])
    oracle = make_oracle(truth)
    assert oracle(truth[:0]) == 5.0
    assert oracle(truth[:2]) == 7.0


# ---------------------------------------------------------------------------
# seasonal AR fit

def _seasonal_series(d, head=None, period=24):
    """Integrate a difference series into levels: y[t] = y[t-period] + d."""
    if head is None:
        head = np.full(period, 50.0)
    y = np.empty(period + len(d))
    y[:period] = head
    for t in range(len(d)):
        y[period + t] = y[t] + d[t]
    return y


def _ar_series(coeffs, n, sigma, seed):
    rng = np.random.default_rng(seed)
    p = len(coeffs)
    d = np.zeros(n + 100)
    eps = rng.normal(0, sigma, size=n + 100)
    for t in range(p, n + 100):
        d[t] = sum(coeffs[j] * d[t - 1 - j] for j in range(p)) + eps[t]
    return d[100:]


def test_recovers_ar1_coefficient():
    d = _ar_series([0.5], 1200, sigma=1.0, seed=4)
    model = fit_seasonal_ar(_seasonal_series(d), order=1)
    assert model.order == 1
    assert model.coeffs[0] == pytest.approx(0.5, abs=0.1)
    assert model.sigma == pytest.approx(1.0, rel=0.15)


def test_recovers_ar2_coefficients():
    d = _ar_series([0.5, -0.3], 2400, sigma=0.8, seed=5)
    model = fit_seasonal_ar(_seasonal_series(d), order=2)
    assert model.coeffs == pytest.approx([0.5, -0.3], abs=0.1)


def test_periodic_series_falls_back_to_seasonal_persistence():
    pattern = 10.0 + np.sin(np.arange(24) / 24 * 2 * np.pi)
    y = np.tile(pattern, 10)
    model = fit_seasonal_ar(y, order=2)
    # differences are identically zero: AR(2) is singular, order drops to 0
    assert model.order == 0
    assert model.sigma == 1e-6  # floored
    assert np.max(np.abs(one_step_residuals(model, y))) == 0.0
    assert np.array_equal(forecast(model, 48), np.tile(pattern, 2))


def test_sigma_matches_training_residual_spread():
    d = _ar_series([0.4], 800, sigma=2.0, seed=6)
    y = _seasonal_series(d)
    model = fit_seasonal_ar(y, order=2)
    resid = one_step_residuals(model, y)
    assert np.std(resid, ddof=1) == pytest.approx(model.sigma, rel=1e-12)


def test_minimum_length_enforced():
    with pytest.raises(ValueError, match="need at least 74 observations, got 73"):
        fit_seasonal_ar(np.ones(73), order=2)


def test_forecast_recursion_closed_form():
    # AR(1) with phi = 0.5 on a zero level: the k-step difference forecast
    # is 0.5^(k+1), and one period out the re-added level is itself the
    # first forecast. Powers of two are exact in floats.
    model = SeasonalARModel(
        period=24, order=1, coeffs=np.array([0.5]), sigma=1.0,
        y_tail=np.zeros(24), d_tail=np.array([1.0]), n_train=100,
    )
    out = forecast(model, 26)
    assert out[0] == 0.5
    assert out[1] == 0.25
    assert out[23] == 0.5**24
    assert out[24] == 0.5 + 0.5**25  # recycled level + decayed difference
    with pytest.raises(ValueError):
        forecast(model, 0)


# ---------------------------------------------------------------------------
# residual diagnostics

def test_acf_lag0_is_one():
    rng = np.random.default_rng(7)
    r = acf(rng.normal(size=100), 10)
    assert r[0] == 1.0


def test_acf_alternating_series():
    # x = +1,-1,+1,... has mean 0 and acf(1) = -(n-1)/n exactly
    n = 10
    x = np.array([1.0, -1.0] * (n // 2))
    r = acf(x, 2)
    assert r[1] == -(n - 1) / n
    assert r[2] == (n - 2) / n


def test_white_noise_acf_is_small():
    rng = np.random.default_rng(8)
    r = acf(rng.normal(size=10000), 10)
    assert np.all(np.abs(r[1:]) < 4 * acf_band(10000))


def test_acf_validation():
    with pytest.raises(ValueError, match="degenerate residuals"):
        acf(np.ones(50), 5)
    with pytest.raises(ValueError, match="nlags"):
        acf(np.arange(5.0), 5)


def test_pacf_first_lag_matches_acf():
    rng = np.random.default_rng(9)
    x = rng.normal(size=200)
    assert pacf(x, 3)[1] == pytest.approx(acf(x, 3)[1], rel=1e-12)


def test_pacf_lag2_closed_form():
    x = np.array([2.0, 1.0, 3.0, 0.5, 2.5, 1.5, 3.5, 1.0, 2.0])
    r = acf(x, 2)
    expected = (r[2] - r[1] ** 2) / (1 - r[1] ** 2)
    assert pacf(x, 2)[2] == pytest.approx(expected, rel=1e-12)


def test_pacf_cuts_off_for_ar1():
    d = _ar_series([0.6], 5000, sigma=1.0, seed=10)
    p = pacf(d, 5)
    assert p[1] == pytest.approx(0.6, abs=0.05)
    assert np.all(np.abs(p[2:]) < 0.05)


def test_acf_band_formula():
    assert acf_band(646) == pytest.approx(1.96 / np.sqrt(646), rel=1e-15)


def test_jarque_bera_hand_case():
    # mean 0, m2 = m4 = 1, skew 0, kurtosis 1: JB = n/6 * (1-3)^2/4 = n/6
    x = np.array([-1.0, -1.0, 1.0, 1.0])
    assert jarque_bera(x) == pytest.approx(4 / 6, rel=1e-12)


def test_jarque_bera_separates_normal_from_skewed():
    rng = np.random.default_rng(11)
    assert jarque_bera(rng.normal(size=5000)) < 15
    assert jarque_bera(rng.exponential(size=5000)) > 100


def test_qq_points_symmetry():
    theory, sample = qq_points(np.array([1.0, 2.0, 3.0, 4.0]))
    assert theory.shape == sample.shape == (4,)
    assert theory[0] == pytest.approx(-theory[3], abs=1e-12)
    assert sample[0] == pytest.approx(-sample[3], abs=1e-12)
    # standardized: zero mean, unit ddof=0 variance
    assert sample.mean() == pytest.approx(0.0, abs=1e-12)
    assert np.mean(sample**2) == pytest.approx(1.0, rel=1e-12)


def test_qq_points_near_diagonal_for_normal_sample():
    rng = np.random.default_rng(12)
    theory, sample = qq_points(rng.normal(size=2000))
    inner = slice(100, -100)  # tails are noisy by nature
    assert np.max(np.abs(theory[inner] - sample[inner])) < 0.15


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(-0.8, 0.8))
def test_fit_tracks_random_ar1(seed, phi):
    d = _ar_series([phi], 1500, sigma=1.0, seed=seed)
    model = fit_seasonal_ar(_seasonal_series(d), order=1)
    assert model.coeffs[0] == pytest.approx(phi, abs=0.15)
