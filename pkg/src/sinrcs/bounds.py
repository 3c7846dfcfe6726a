"""Closest packings and upper-bound series for the maximal interference level.

The normalized maximal interference level (P = 1, N = 0, t_cs = 1) drives the
static thresholds in :mod:`sinrcs.carrier_sense`. Exact values are not known;
this module builds the greedy 1-D packing and evaluates the two convergent
series that upper-bound the level on the line (``i_bar_1``) and in the plane
(``i_bar_2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Number of outer terms behind the reference tables of the two series.
# Both tables are partial sums: every tabulated 1-D value is the 100-term
# sum and every 2-D value the 200-term sum, to five decimals.
TABULATED_TERMS_1D = 100
TABULATED_TERMS_2D = 200

ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class PackingSequence:
    alpha: float
    d: tuple[float, ...]
    c: tuple[float, ...]

    @property
    def right(self) -> np.ndarray:
        """Positions of the odd transmitters (cumulative ``d``)."""
        return np.cumsum(self.d)

    @property
    def left(self) -> np.ndarray:
        """Positions of the even transmitters, negated (cumulative ``c``)."""
        return -np.cumsum(self.c)

    def admission_order(self) -> list[float]:
        """Coordinates in placement order, starting with the origin."""
        out = [0.0]
        for r, l in zip(self.right, self.left):
            out += [float(r), float(l)]
        return out


@dataclass(frozen=True)
class BoundResult:
    alpha: float
    value: float
    terms_used: int
    truncation_estimate: float


def _solve_unit_power(offsets: np.ndarray, alpha: float, lo: float) -> float:
    """Smallest gap ``x`` with ``sum((offsets + x)**-alpha) <= 1``.

    Bisection on a bracket grown from ``lo``; the upper end is returned so the
    placed node never measures more than unit power.
    """

    def excess(x):
        return np.sum((offsets + x) ** (-alpha)) - 1.0

    lo = max(lo, 1e-300)
    while excess(lo) <= 0:
        lo /= 2
        if lo < 1e-12:
            raise ArithmeticError("failed to bracket packing root")
    hi = max(2 * lo, 1.0)
    while excess(hi) > 0:
        hi *= 2
        if hi > 1e12:
            raise ArithmeticError("failed to bracket packing root")
    while hi - lo > ROOT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def packing_1d(alpha: float, k_max: int) -> PackingSequence:
    """Greedy closest packing around a transmitter at the origin.

    Transmitters are added alternately right and left of the origin, each as
    close as possible while the power it measures from all earlier ones stays
    at unit level. ``d[k]`` and ``c[k]`` are the successive gaps on the right
    and left side respectively.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    d: list[float] = []
    c: list[float] = []
    right = np.zeros(1)  # positions of origin + right nodes
    left = np.zeros(0)  # distances of left nodes from the origin
    for k in range(1, k_max + 1):
        d_lb, c_lb = lower_bound_separation(alpha, k)
        edge = right[-1]
        # offsets of every earlier node measured from the current right edge
        offsets = np.concatenate((edge - right, edge + left))
        x = _solve_unit_power(offsets, alpha, d_lb)
        d.append(x)
        right = np.append(right, edge + x)

        edge = left[-1] if left.size else 0.0
        offsets = np.concatenate((edge - left, edge + right))
        x = _solve_unit_power(offsets, alpha, c_lb)
        c.append(x)
        left = np.append(left, edge + x)
    return PackingSequence(alpha, tuple(d), tuple(c))


def lower_bound_separation(alpha: float, k: int) -> tuple[float, float]:
    if k < 1:
        raise ValueError("k must be at least 1")
    terms = np.arange(1, 2 * k + 1, dtype=float) ** (-alpha)
    d_lb = math.fsum(terms[:-1]) ** (1 / alpha)
    c_lb = math.fsum(terms) ** (1 / alpha)
    return d_lb, c_lb


def packed_interference_1d(alpha: float, k_max: int, packing: PackingSequence | None = None) -> float:
    """Interference level at the origin of the greedy packing with ``k_max`` nodes per side."""
    p = packing if packing is not None else packing_1d(alpha, k_max)
    cs = np.cumsum(p.c[:k_max])
    ds = np.cumsum(p.d[:k_max])
    return float(np.sum(cs ** (-alpha)) + np.sum(ds ** (-alpha)))


def _separation_sums(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Cumulative lower-bound separations for outer indices 1..n.

    Returns (sum of d bounds, sum of c bounds, next d bound, next c bound).
    Inner power sums are accumulated once over 1..2n+2.
    """
    i = np.arange(1, 2 * n + 3, dtype=float)
    inner = np.cumsum(i ** (-alpha))
    d_lb = inner[0::2] ** (1 / alpha)  # sums to 2k-1
    c_lb = inner[1::2] ** (1 / alpha)  # sums to 2k
    return np.cumsum(d_lb[:n]), np.cumsum(c_lb[:n]), float(d_lb[n]), float(c_lb[n])


def _power_tail(last_sum: float, step: float, exponent: float) -> float:
    """Bound on sum_{m>=1} (last_sum + m*step)^-exponent by the integral from 0."""
    return float(last_sum ** (1 - exponent) / (step * (exponent - 1)))


def _i1_partial(alpha: float, n: int) -> tuple[float, float]:
    D, C, d_next, c_next = _separation_sums(alpha, n)
    value = math.fsum(C ** (-alpha)) + math.fsum(D ** (-alpha))
    tail = _power_tail(C[-1], c_next, alpha) + _power_tail(D[-1], d_next, alpha)
    return value, tail


def _i2_partial(alpha: float, n: int) -> tuple[float, float]:
    D, _, d_next, _ = _separation_sums(alpha, n)
    value = 6 * math.fsum(D ** (1 - alpha))
    tail = 6 * _power_tail(D[-1], d_next, alpha - 1)
    return value, tail


def _series(
    partial, alpha: float, tolerance: float, terms: int | None, budget: int | None = None
) -> BoundResult:
    if terms is not None:
        if terms < 1:
            raise ValueError("terms must be at least 1")
        value, tail = partial(alpha, terms)
        return BoundResult(alpha, value, terms, tail)
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    n = 64
    value, tail = partial(alpha, n)
    while tail >= tolerance:
        # tail(n) ~ n^-(decay) with decay >= 1; extrapolate, then creep up
        decay = _tail_decay(partial, alpha)
        n = max(int(n * 1.05) + 1, int(n * (tail / tolerance) ** (1 / decay)) + 1)
        if budget is not None and n >= budget:
            value, tail = partial(alpha, budget)
            return BoundResult(alpha, value, budget, tail)
        if n > 50_000_000:
            raise ArithmeticError("series did not reach the requested tolerance")
        value, tail = partial(alpha, n)
    return BoundResult(alpha, value, n, tail)


def _tail_decay(partial, alpha: float) -> float:
    return max(1.0, alpha - 2.0) if partial is _i2_partial else max(1.0, alpha - 1.0)


def i_bar_1(alpha: float, tolerance: float = 1e-6, terms: int | None = None) -> BoundResult:
    """Upper bound on the 1-D normalized maximal interference level.

    With ``terms`` given the series is cut after that many outer terms
    (``TABULATED_TERMS_1D`` reproduces the reference table); otherwise terms
    are added until the integral tail bound falls below ``tolerance``.
    """
    if not alpha >= 2:
        raise ValueError("1-D series requires alpha >= 2")
    return _series(_i1_partial, alpha, tolerance, terms)


def i_bar_2(alpha: float, tolerance: float = 1e-6, terms: int | None = None) -> BoundResult:
    """Upper bound on the 2-D normalized maximal interference level (hexagonal rings)."""
    if not alpha > 2:
        raise ValueError("2-D series requires alpha > 2")
    return _series(_i2_partial, alpha, tolerance, terms)


def i_bound(alpha: float, dim: int = 2, tolerance: float = 1e-9, max_terms: int = 2_000_000) -> float:
    """Safe interference bound for the static thresholds: the summed series
    plus its remaining tail bound.

    The sum stops at ``tolerance`` or after ``max_terms`` outer terms,
    whichever comes first. Slowly decaying series (alpha near 2, or 3 in the
    plane) then carry a larger tail, which keeps the bound safe but looser.
    """
    if dim == 1:
        if not alpha >= 2:
            raise ValueError("1-D series requires alpha >= 2")
        r = _series(_i1_partial, alpha, tolerance, None, max_terms)
    elif dim == 2:
        if not alpha > 2:
            raise ValueError("2-D series requires alpha > 2")
        r = _series(_i2_partial, alpha, tolerance, None, max_terms)
    else:
        raise ValueError("dim must be 1 or 2")
    return r.value + r.truncation_estimate


def partial_sums(alpha: float, n: int, dim: int) -> np.ndarray:
    """Running partial sums of the bound series for outer indices 1..n."""
    D, C, _, _ = _separation_sums(alpha, n)
    if dim == 1:
        return np.cumsum(C ** (-alpha) + D ** (-alpha))
    return 6 * np.cumsum(D ** (1 - alpha))


def hex_ring_points(alpha: float, rings: int) -> np.ndarray:
    """Node positions of the hexagonal-ring construction around the origin.

    Ring ``i`` sits at integer radius ``floor(d_1 + ... + d_i)`` (lower-bound
    separations) on a unit hexagonal grid and holds six nodes per unit of
    radius.
    """
    D, _, _, _ = _separation_sums(alpha, rings)
    corners = np.array([(math.cos(math.pi / 3 * m), math.sin(math.pi / 3 * m)) for m in range(7)])
    pts = []
    for radius in np.floor(D).astype(int):
        for m in range(6):
            a, b = corners[m] * radius, corners[m + 1] * radius
            for s in range(radius):
                pts.append(a + (b - a) * s / radius)
    return np.array(pts)
