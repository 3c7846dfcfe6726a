"""Per-node carrier-sensing threshold adaptation driven by starvation and hidden-node warnings.

A node raises its threshold by one step once it has been kept off the air for
``n_slot`` consecutive packet slots (exposed-node symptom), and broadcasts a
hop-limited warning after ``m_ack`` consecutive unacknowledged transmissions
(hidden-node symptom). Every node reached by a warning lowers its threshold
by one step, never below the initial value.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Mapping

import numpy as np

from .carrier_sense import tcs_to_rcs
from .channel import ChannelParams

WARNING_BITS = 200


class SlotOutcome(str, enum.Enum):
    DENIED = "denied"
    ACKED = "transmitted_acked"
    NO_ACK = "transmitted_no_ack"


@dataclass(frozen=True)
class AdaptiveParams:
    delta_s: float
    t_cs_init: float
    t_max: float
    m_ack: int = 2
    n_slot: int = 3
    h_w: int = 1

    def __post_init__(self):
        if not self.delta_s > 0:
            raise ValueError("delta_s must be positive")
        if not self.t_cs_init <= self.t_max:
            raise ValueError("t_cs_init must not exceed t_max")
        if self.m_ack < 1 or self.n_slot < 1 or self.h_w < 1:
            raise ValueError("m_ack, n_slot and h_w must be at least 1")

    @classmethod
    def from_static(
        cls,
        t_star: float,
        step_ratio: float = 20.0,
        max_ratio: float = 1e4,
        m_ack: int = 2,
        n_slot: int = 3,
        h_w: int = 1,
    ) -> "AdaptiveParams":
        """Parameters expressed as multiples of the static threshold ``t_star``."""
        return cls(step_ratio * t_star, t_star, max_ratio * t_star, m_ack, n_slot, h_w)


@dataclass(frozen=True)
class HnWarning:
    source: Hashable
    sequence: int
    ttl: int


@dataclass(frozen=True)
class NodeAdaptiveState:
    t_cs_current: float
    denied_streak: int = 0
    ack_fail_streak: int = 0
    seen_warnings: frozenset = field(default_factory=frozenset)

    @classmethod
    def fresh(cls, params: AdaptiveParams) -> "NodeAdaptiveState":
        return cls(params.t_cs_init)


def on_slot_outcome(
    state: NodeAdaptiveState, outcome: SlotOutcome, params: AdaptiveParams
) -> tuple[NodeAdaptiveState, bool]:
    outcome = SlotOutcome(outcome)
    if outcome is SlotOutcome.DENIED:
        streak = state.denied_streak + 1
        t_cs = state.t_cs_current
        if streak >= params.n_slot and t_cs <= params.t_max - params.delta_s:
            t_cs = min(t_cs + params.delta_s, params.t_max)
        return replace(state, denied_streak=streak, t_cs_current=t_cs), False
    if outcome is SlotOutcome.ACKED:
        return replace(state, denied_streak=0, ack_fail_streak=0), False
    fails = state.ack_fail_streak + 1
    if fails >= params.m_ack:
        return replace(state, denied_streak=0, ack_fail_streak=0), True
    return replace(state, denied_streak=0, ack_fail_streak=fails), False


def on_warning_received(
    state: NodeAdaptiveState, w: HnWarning, params: AdaptiveParams
) -> tuple[NodeAdaptiveState, HnWarning | None]:
    key = (w.source, w.sequence)
    if key in state.seen_warnings:
        return state, None
    t_cs = state.t_cs_current
    if t_cs >= params.t_cs_init + params.delta_s:
        # clamp so rounding from many up/down steps never dips below the floor
        t_cs = max(t_cs - params.delta_s, params.t_cs_init)
    new = replace(state, t_cs_current=t_cs, seen_warnings=state.seen_warnings | {key})
    fwd = replace(w, ttl=w.ttl - 1) if w.ttl - 1 > 0 else None
    return new, fwd


def propagate(
    warning: HnWarning, origin: Hashable, neighbor_graph: Mapping[Hashable, Iterable[Hashable]]
) -> set[tuple[Hashable, HnWarning]]:
    """Flood ``warning`` from ``origin``; every node within ``warning.ttl`` hops
    receives exactly one copy, carrying the TTL it arrived with."""
    delivered: dict[Hashable, HnWarning] = {}
    queue = deque([(origin, warning)])
    while queue:
        node, w = queue.popleft()
        for nb in neighbor_graph.get(node, ()):
            if nb == origin or nb in delivered:
                continue
            delivered[nb] = w
            if w.ttl - 1 > 0:
                queue.append((nb, replace(w, ttl=w.ttl - 1)))
    return set(delivered.items())


def broadcast_count(deliveries: Iterable[tuple[Hashable, HnWarning]]) -> int:
    """Warning frames put on the air: the origin's plus one per forwarding node."""
    return 1 + sum(1 for _, w in deliveries if w.ttl - 1 > 0)


def effective_rcs(state: NodeAdaptiveState, params: ChannelParams) -> float:
    return tcs_to_rcs(state.t_cs_current, params)


def neighbor_graph(points: np.ndarray, radius: float) -> dict[int, list[int]]:
    """Unit-disk graph over ``points`` (indices as node ids)."""
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    close = np.hypot(diff[..., 0], diff[..., 1]) <= radius
    np.fill_diagonal(close, False)
    return {i: np.nonzero(row)[0].tolist() for i, row in enumerate(close)}
