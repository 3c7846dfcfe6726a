"""Rician block fading: power-gain sampler and density."""

from __future__ import annotations

import math

import numpy as np

SERIES_RTOL = 1e-14


def sample_rician_gain(k_a: float, rng: np.random.Generator, size=None):
    """Draw unit-mean Rician power gains with factor ``k_a``.

    ``k_a = inf`` means no fading (gain exactly 1); ``k_a = 0`` is Rayleigh,
    i.e. exponentially distributed power.
    """
    if k_a < 0:
        raise ValueError("Rician factor must be non-negative")
    if math.isinf(k_a):
        return 1.0 if size is None else np.ones(size)
    nu = math.sqrt(k_a / (k_a + 1))
    sigma = math.sqrt(1 / (2 * (k_a + 1)))
    x = rng.normal(0.0, sigma, size)
    y = rng.normal(0.0, sigma, size)
    return (nu + x) ** 2 + y**2


def log_bessel_i0(x) -> np.ndarray:
    """log I0(x) from the power series sum_k (x^2/4)^k / (k!)^2.

    Summed in log space so large arguments do not overflow; terms are added
    past the peak until they fall below ``SERIES_RTOL`` of the running sum.
    """
    x = np.abs(np.asarray(x, dtype=float))
    q = np.where(x > 0, 2 * np.log(np.where(x > 0, x, 1.0) / 2), -np.inf)
    total = np.zeros_like(x)  # k = 0 term is 1
    peak = float(np.max(x)) / 2 if x.size else 0.0
    k = 0
    log_fact = 0.0
    log_rtol = math.log(SERIES_RTOL)
    while True:
        k += 1
        log_fact += math.log(k)
        term = k * q - 2 * log_fact
        total = np.logaddexp(total, term)
        if k > peak and np.all(term - total < log_rtol):
            return total


def bessel_i0(x) -> np.ndarray:
    return np.exp(log_bessel_i0(x))


def rician_pdf(g, k_a: float):
    """Density of the unit-mean Rician power gain at ``g``."""
    if k_a < 0 or math.isinf(k_a):
        raise ValueError("density defined for finite, non-negative Rician factor")
    g = np.asarray(g, dtype=float)
    out = np.zeros_like(g)
    ok = g >= 0
    gg = g[ok]
    log_p = (
        math.log1p(k_a)
        - k_a
        - (1 + k_a) * gg
        + log_bessel_i0(np.sqrt(4 * k_a * (1 + k_a) * gg))
    )
    out[ok] = np.exp(log_p)
    return out if out.ndim else float(out)
