"""Special functions behind every Beta posterior: log-gamma, log-beta, incomplete beta."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from ..errors import DomainError

# Lanczos approximation, g = 7, 9 coefficients
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

CF_MAX_ITER = 10_000
CF_EPS = 1e-15
_TINY = 1e-300


def _lanczos_log_gamma(x: np.ndarray) -> np.ndarray:
    """log Γ(x) for x >= 0.5."""
    z = x - 1.0
    series = np.full_like(z, LANCZOS_COEFFICIENTS[0])
    for i in range(1, len(LANCZOS_COEFFICIENTS)):
        series = series + LANCZOS_COEFFICIENTS[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(series)


def log_gamma(x: float | np.ndarray) -> float | np.ndarray:
    """Natural log of Γ(x) for x > 0.

    Accepts scalars or arrays; scalars come back as ``float``. Values below
    0.5 go through the reflection formula.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")

    out = np.empty_like(arr)
    small = arr < 0.5
    out[~small] = _lanczos_log_gamma(arr[~small])
    if np.any(small):
        xs = arr[small]
        out[small] = np.log(np.pi / np.sin(np.pi * xs)) - _lanczos_log_gamma(1.0 - xs)

    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def log_beta(a: float | np.ndarray, b: float | np.ndarray) -> float | np.ndarray:
    """log B(a, b) = log Γ(a) + log Γ(b) − log Γ(a + b)."""
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError(f"log_beta requires a > 0 and b > 0, got ({a!r}, {b!r})")
    return log_gamma(a_arr) + log_gamma(b_arr) - log_gamma(a_arr + b_arr)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0

    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d

    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        # Even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c

        # Odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        step = d * c
        h *= step

        if abs(step - 1.0) < CF_EPS:
            return h

    raise DomainError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def beta_cdf(params, x: float) -> float:
    """Regularized incomplete beta I_x(α, β) for ``params`` (a BetaParams)."""
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"beta_cdf requires 0 <= x <= 1, got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0

    a, b = params.alpha, params.beta
    log_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    front = math.exp(log_front)

    # Continued fraction converges fast only below the mean-ish switch point
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def beta_quantile(params, q: float) -> float:
    """Inverse of :func:`beta_cdf` in x, for q in (0, 1)."""
    if not (0.0 < q < 1.0):
        raise DomainError(f"beta_quantile requires 0 < q < 1, got {q!r}")
    return float(
        brentq(lambda x: beta_cdf(params, x) - q, 0.0, 1.0, xtol=1e-15, maxiter=500)
    )
