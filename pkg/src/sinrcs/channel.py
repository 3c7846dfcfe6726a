"""SINR physics: distances, received powers, feasibility and interference levels.

All quantities are in SI units (meters, watts). Points are plain 2-D
coordinates; a 1-D layout is a set of points with ``y == 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence


class SingularPathLoss(ValueError):
    """Raised when a receiving point coincides with an emitter."""


class Point(NamedTuple):
    x: float
    y: float = 0.0

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Link:
    id: Hashable
    tx: Point
    rx: Point

    def __post_init__(self):
        object.__setattr__(self, "tx", Point(*map(float, self.tx)))
        object.__setattr__(self, "rx", Point(*map(float, self.rx)))
        for v in (*self.tx, *self.rx):
            if not math.isfinite(v):
                raise ValueError(f"link {self.id!r}: non-finite coordinate")
        if self.tx == self.rx:
            raise ValueError(f"link {self.id!r}: transmitter and receiver coincide")

    @property
    def length(self) -> float:
        return self.tx.dist(self.rx)

    def scaled(self, s: float) -> "Link":
        return Link(self.id, Point(self.tx.x * s, self.tx.y * s), Point(self.rx.x * s, self.rx.y * s))


@dataclass(frozen=True)
class ChannelParams:
    """Transmit power, noise floor, path-loss exponent and SINR threshold."""

    power_p: float = 1.0
    noise_n: float = 0.0
    alpha: float = 4.0
    beta_sinr: float = 100.0

    def __post_init__(self):
        if not self.power_p > 0:
            raise ValueError("power_p must be positive")
        if not self.noise_n >= 0:
            raise ValueError("noise_n must be non-negative")
        if not self.alpha >= 2:
            raise ValueError("alpha must be at least 2")
        if not self.beta_sinr > 0:
            raise ValueError("beta_sinr must be positive")

    @classmethod
    def from_db(cls, beta_db: float, **kw) -> "ChannelParams":
        return cls(beta_sinr=10 ** (beta_db / 10), **kw)

    def received(self, d: float, gain: float = 1.0) -> float:
        if d <= 0:
            raise SingularPathLoss("zero distance between emitter and receiving point")
        return self.power_p * gain * d ** (-self.alpha)


def link_distance(i: Link, j: Link) -> float:
    """Smallest of the four endpoint distances between links ``i`` and ``j``.

    This is the distance that bounds interference in either direction of a
    DATA/ACK exchange.
    """
    return min(j.tx.dist(i.rx), j.rx.dist(i.tx), j.rx.dist(i.rx), j.tx.dist(i.tx))


def cumulative_power_at(
    x: Point,
    transmitters: Iterable[Point],
    params: ChannelParams,
    gains: Sequence[float] | None = None,
) -> float:
    """Noise plus the received power at ``x`` from every transmitter."""
    x = Point(*x)
    total = params.noise_n
    for k, z in enumerate(transmitters):
        g = 1.0 if gains is None else gains[k]
        total += params.received(x.dist(Point(*z)), g)
    return total


def sinr_at(
    rx: Point,
    own_tx: Point,
    concurrent_tx: Iterable[Point],
    params: ChannelParams,
    gain: float = 1.0,
    interferer_gains: Sequence[float] | None = None,
) -> float:
    signal = params.received(Point(*rx).dist(Point(*own_tx)), gain)
    denom = cumulative_power_at(rx, concurrent_tx, params, interferer_gains)
    if denom == 0:
        return math.inf
    return signal / denom


def _pair_gain(gains: Mapping | None, i: Link, j: Link) -> float:
    if gains is None:
        return 1.0
    return gains.get((j.id, i.id), 1.0)


def link_sinr(i: Link, s: Iterable[Link], params: ChannelParams, gains: Mapping | None = None) -> float:
    """Bi-directional SINR of ``i`` against the other links of ``s``.

    ``gains`` optionally maps ``(j.id, i.id)`` to the fading gain of the
    interference from link ``j`` onto link ``i`` and ``(i.id, i.id)`` to the
    gain of ``i``'s own signal.
    """
    interference = params.noise_n
    for j in s:
        if j.id == i.id:
            continue
        interference += params.received(link_distance(i, j), _pair_gain(gains, i, j))
    signal = params.received(i.length, _pair_gain(gains, i, i))
    if interference == 0:
        return math.inf
    return signal / interference


def is_feasible_state(s: Iterable[Link], params: ChannelParams, gains: Mapping | None = None) -> bool:
    """True iff every link of ``s`` meets the SINR threshold in both directions."""
    s = list(s)
    return all(link_sinr(i, s, params, gains) >= params.beta_sinr for i in s)


def infeasible_links(s: Iterable[Link], params: ChannelParams, gains: Mapping | None = None) -> list[Link]:
    s = list(s)
    return [i for i in s if link_sinr(i, s, params, gains) < params.beta_sinr]


def interference_level(i: Link, s: Iterable[Link], alpha: float) -> float:
    """Sum of ``|t_j - t_i|^-alpha`` over the other transmitters in ``s``."""
    total = 0.0
    for j in s:
        if j.id == i.id:
            continue
        d = j.tx.dist(i.tx)
        if d == 0:
            raise SingularPathLoss(f"transmitters of {i.id!r} and {j.id!r} coincide")
        total += d ** (-alpha)
    return total


def bidirectional_interference_level(i: Link, s: Iterable[Link], alpha: float) -> float:
    total = 0.0
    for j in s:
        if j.id == i.id:
            continue
        d = link_distance(i, j)
        if d == 0:
            raise SingularPathLoss(f"links {i.id!r} and {j.id!r} share an endpoint")
        total += d ** (-alpha)
    return total


def point_interference_level(x: Point, points: Iterable[Point], alpha: float) -> float:
    """Interference level at ``x`` from bare transmitter positions."""
    x = Point(*x)
    total = 0.0
    for z in points:
        d = x.dist(Point(*z))
        if d == 0:
            raise SingularPathLoss("coincident transmitter")
        total += d ** (-alpha)
    return total
