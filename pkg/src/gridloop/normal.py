"""Inverse standard-normal CDF without external dependencies.

Uses Acklam's piecewise rational approximation, whose absolute error is
below 1.15e-9 over the open unit interval -- comfortably inside the 1e-6
tolerance the detector calibration contract requires. Keeping this local
(rather than pulling in scipy) holds the runtime dependency set to numpy.
"""

from __future__ import annotations

import numpy as np

__all__ = ["norm_ppf", "norm_isf"]

# Coefficients for the central rational approximation ...
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
# ... and for the tails.
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)

_P_LOW = 0.02425
_P_HIGH = 1.0 - _P_LOW


def _polyval(coeffs, x):
    out = np.zeros_like(x) + coeffs[0]
    for c in coeffs[1:]:
        out = out * x + c
    return out


def norm_ppf(p):
    """Quantile function of N(0, 1).

    Accepts a scalar or array in [0, 1]; p = 0 and p = 1 map to -inf/+inf.
    Values outside [0, 1] raise ValueError.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0.0) | (p_arr > 1.0) | ~np.isfinite(p_arr)):
        raise ValueError("probability must lie in [0, 1]")

    x = np.empty_like(p_arr)

    lo = (p_arr > 0.0) & (p_arr < _P_LOW)
    hi = (p_arr > _P_HIGH) & (p_arr < 1.0)
    mid = (p_arr >= _P_LOW) & (p_arr <= _P_HIGH)

    if np.any(mid):
        q = p_arr[mid] - 0.5
        r = q * q
        x[mid] = q * _polyval(_A, r) / (_polyval(_B, r) * r + 1.0)
    if np.any(lo):
        q = np.sqrt(-2.0 * np.log(p_arr[lo]))
        x[lo] = _polyval(_C, q) / (_polyval(_D, q) * q + 1.0)
    if np.any(hi):
        q = np.sqrt(-2.0 * np.log1p(-p_arr[hi]))
        x[hi] = -(_polyval(_C, q) / (_polyval(_D, q) * q + 1.0))

    x[p_arr == 0.0] = -np.inf
    x[p_arr == 1.0] = np.inf
    return float(x) if np.isscalar(p) or np.ndim(p) == 0 else x


def norm_isf(p):
    """Upper-tail quantile Q^{-1}(p): the x with P(Z > x) = p."""
    # exact reflection; avoids the 1 - p cancellation for tiny p
    result = norm_ppf(p)
    return -result if np.ndim(result) == 0 else -np.asarray(result)
