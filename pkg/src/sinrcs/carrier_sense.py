"""Carrier-sensing admission rules and interference-safe static settings.

Two mechanisms are modelled:

* CPCS: a transmitter starts only if the cumulative power it measures
  (noise plus every earlier transmitter) is at most ``t_cs``.
* IPCS: transmitters count nearby active transmitters from step changes of
  measured power and start only when the count is zero; in the idealized
  setting this admits exactly the sets whose transmitters are pairwise at
  least ``r_cs`` apart.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .channel import ChannelParams, Link, SingularPathLoss


class Mechanism(str, enum.Enum):
    CPCS = "cpcs"
    IPCS = "ipcs"


class InfeasibleLinkLength(ValueError):
    pass


@dataclass(frozen=True)
class CsConfig:
    mechanism: Mechanism
    t_cs: float | None = None
    r_cs: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.mechanism is Mechanism.CPCS and self.t_cs is None:
            raise ValueError("CPCS needs t_cs")
        if self.mechanism is Mechanism.IPCS and not (self.r_cs is not None and self.r_cs > 0):
            raise ValueError("IPCS needs a positive r_cs")

    @classmethod
    def cpcs(cls, t_cs: float) -> "CsConfig":
        return cls(Mechanism.CPCS, t_cs=t_cs)

    @classmethod
    def ipcs(cls, r_cs: float) -> "CsConfig":
        return cls(Mechanism.IPCS, r_cs=r_cs)

    @classmethod
    def legacy(cls, params: ChannelParams, margin_db: float = 20.0) -> "CsConfig":
        """Conventional energy-detect threshold ``c + N`` with ``c`` set
        ``margin_db`` above the noise floor."""
        if params.noise_n <= 0:
            raise ValueError("legacy threshold is defined relative to a positive noise floor")
        c = params.noise_n * 10 ** (margin_db / 10)
        return cls(Mechanism.CPCS, t_cs=c + params.noise_n)

    def validate(self, params: ChannelParams) -> "CsConfig":
        if self.mechanism is Mechanism.CPCS and not self.t_cs > params.noise_n:
            raise ValueError("t_cs must exceed the noise floor")
        return self


@dataclass(frozen=True)
class IpcsState:
    counter: int = 0
    last_measured_power: float = 0.0

    @property
    def may_transmit(self) -> bool:
        return self.counter == 0


def _tx_power(params: ChannelParams, a: Link, b: Link) -> float:
    d = a.tx.dist(b.tx)
    if d == 0:
        raise SingularPathLoss(f"transmitters of {a.id!r} and {b.id!r} coincide")
    return params.power_p * d ** (-params.alpha)


def cpcs_simple_admits(s: Iterable[Link], t_cs: float, params: ChannelParams) -> bool:
    """Order-free CPCS check: every transmitter sees all the others."""
    s = list(s)
    for i in s:
        measured = params.noise_n + sum(_tx_power(params, j, i) for j in s if j.id != i.id)
        if measured > t_cs:
            return False
    return True


def _check_distinct(seq: Sequence[Link]) -> None:
    ids = [link.id for link in seq]
    if len(set(ids)) != len(ids):
        raise ValueError("admission sequence contains duplicate links")


def cpcs_sequence_admits(seq: Sequence[Link], t_cs: float, params: ChannelParams) -> bool:
    """Ordered CPCS check: the k-th transmitter only sees the first k-1."""
    _check_distinct(seq)
    for k, i in enumerate(seq):
        measured = params.noise_n + sum(_tx_power(params, j, i) for j in seq[:k])
        if measured > t_cs:
            return False
    return True


def cpcs_first_rejected(seq: Sequence[Link], t_cs: float, params: ChannelParams) -> int | None:
    """Index of the first transmitter the sequence check would refuse."""
    _check_distinct(seq)
    for k, i in enumerate(seq):
        measured = params.noise_n + sum(_tx_power(params, j, i) for j in seq[:k])
        if measured > t_cs:
            return k
    return None


def ipcs_admits(s: Iterable[Link], r_cs: float) -> bool:
    s = list(s)
    for a in range(len(s)):
        for b in range(a + 1, len(s)):
            if s[a].tx.dist(s[b].tx) < r_cs:
                return False
    return True


def ipcs_counter_update(state: IpcsState, delta_p: float, r_cs: float, params: ChannelParams) -> IpcsState:
    step = params.power_p * r_cs ** (-params.alpha)
    counter = state.counter
    if delta_p >= step:
        counter += 1
    elif delta_p <= -step:
        counter -= 1
    return IpcsState(counter, state.last_measured_power + delta_p)


def _check_link_budget(d_max: float, params: ChannelParams) -> float:
    budget = d_max ** (-params.alpha) / params.beta_sinr - params.noise_n / params.power_p
    if budget < 0:
        raise InfeasibleLinkLength("link length infeasible at given beta, N, P")
    return budget


def _certified_separation(d_max: float, params: ChannelParams, i_bound: float) -> float:
    """Transmitter separation that leaves every link of length ``d_max`` its SINR margin.

    Both static settings derive from this one value, so with the same inputs
    the CPCS threshold is exactly the power received across the IPCS range.
    """
    budget = _check_link_budget(d_max, params)
    if budget == 0:
        return math.inf
    return 2 * d_max + (budget / i_bound) ** (-1 / params.alpha)


def static_cpcs_threshold(d_max: float, params: ChannelParams, i_bound: float) -> float:
    """Largest CPCS threshold certified interference-safe for links up to ``d_max``.

    ``i_bound`` must upper-bound the normalized maximal interference level of
    the space the links live in (see :mod:`sinrcs.bounds`).
    """
    sep = _certified_separation(d_max, params, i_bound)
    if math.isinf(sep):
        return params.noise_n
    return params.power_p * sep ** (-params.alpha) + params.noise_n


def static_ipcs_range(d_max: float, params: ChannelParams, i_bound: float) -> float:
    """Smallest transmitter separation certified interference-safe for IPCS."""
    return _certified_separation(d_max, params, i_bound)


def rcs_to_tcs(r_cs: float, params: ChannelParams) -> float:
    if not r_cs > 0:
        raise ValueError("r_cs must be positive")
    return params.power_p * r_cs ** (-params.alpha) + params.noise_n


def tcs_to_rcs(t_cs: float, params: ChannelParams) -> float:
    if not t_cs > params.noise_n:
        raise ValueError("t_cs must exceed the noise floor")
    return ((t_cs - params.noise_n) / params.power_p) ** (-1 / params.alpha)


def max_tx_distance(params: ChannelParams) -> float:
    if params.noise_n <= 0:
        raise ValueError("transmission range is unbounded without noise")
    return (params.power_p / (params.beta_sinr * params.noise_n)) ** (1 / params.alpha)


def rescale_threshold(t_cs: float, s: float, params: ChannelParams) -> float:
    """Threshold that admits the same sequences after scaling all coordinates by ``s``."""
    return params.noise_n + (t_cs - params.noise_n) * s ** (-params.alpha)

