"""Event-driven simulator of saturated CSMA/CA links with DCF timing.

Every link has a backlogged transmitter that waits for DIFS of idle channel,
counts down a random backoff (frozen while the channel is sensed busy) and
then runs a DATA / SIFS / ACK exchange. The channel counts as busy for a node
when its carrier-sensing rule says so:

* CPCS (static, adaptive, or the legacy energy-detect threshold): the
  measured power ``N + sum of active transmitter powers`` exceeds the node's
  threshold;
* IPCS: the node's counter of power steps is non-zero.

A transmitter's power is sensed for its whole exchange. Receptions are
judged against the actual emitters on the air: DATA succeeds iff its SINR at
the receiver never drops below beta while it is on the air, the ACK likewise
at the transmitter.

Times are kept in microseconds. Identical inputs and seed give identical
results, event log included.
"""

from __future__ import annotations

import bisect
import csv
import enum
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .adaptive import (
    WARNING_BITS,
    AdaptiveParams,
    HnWarning,
    NodeAdaptiveState,
    SlotOutcome,
    broadcast_count,
    neighbor_graph,
    on_slot_outcome,
    on_warning_received,
    propagate,
)
from .carrier_sense import CsConfig, Mechanism, max_tx_distance
from .channel import ChannelParams, SingularPathLoss, sinr_at
from .fading import sample_rician_gain


class ConfigError(ValueError):
    pass


def frame_airtime(n_bytes: float, rate: float) -> float:
    """Seconds needed to send ``n_bytes`` at ``rate`` bits per second."""
    if n_bytes < 0 or not rate > 0:
        raise ValueError("need non-negative size and positive rate")
    return 8 * n_bytes / rate


@dataclass(frozen=True)
class MacParams:
    slot_us: float = 20.0
    sifs_us: float = 10.0
    difs_us: float = 50.0
    data_rate: float = 11e6
    payload_bytes: int = 1460
    ack_bytes: int = 14
    cw_min: int = 31
    cw_max: int = 1023
    retry_limit: int = 7
    sir_requirement_db: float = 20.0

    def __post_init__(self):
        for name in ("slot_us", "sifs_us", "difs_us", "data_rate", "payload_bytes", "ack_bytes"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.cw_min <= self.cw_max:
            raise ConfigError("need 0 < cw_min <= cw_max")
        if self.retry_limit < 0:
            raise ConfigError("retry_limit must be non-negative")

    @property
    def data_us(self) -> float:
        return 1e6 * frame_airtime(self.payload_bytes, self.data_rate)

    @property
    def ack_us(self) -> float:
        return 1e6 * frame_airtime(self.ack_bytes, self.data_rate)

    @property
    def exchange_us(self) -> float:
        return self.data_us + self.sifs_us + self.ack_us

    @property
    def payload_bits(self) -> int:
        return 8 * self.payload_bytes

    def check_channel(self, channel: ChannelParams) -> None:
        beta = 10 ** (self.sir_requirement_db / 10)
        if not math.isclose(beta, channel.beta_sinr, rel_tol=1e-9):
            raise ConfigError(
                f"SIR requirement {self.sir_requirement_db} dB does not match beta {channel.beta_sinr}"
            )


@dataclass(frozen=True)
class FadingParams:
    """Block fading: ``blocks`` lists (start seconds, Rician factor); the first starts at 0."""

    blocks: tuple[tuple[float, float], ...] = ((0.0, math.inf),)

    def __post_init__(self):
        blocks = tuple((float(s), float(k)) for s, k in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks or blocks[0][0] != 0:
            raise ConfigError("first fading block must start at time 0")
        starts = [s for s, _ in blocks]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError("fading blocks must start at increasing times")
        if any(k < 0 for _, k in blocks):
            raise ConfigError("Rician factor must be non-negative")

    @classmethod
    def constant(cls, k_a: float = math.inf) -> "FadingParams":
        return cls(((0.0, k_a),))

    @property
    def is_flat(self) -> bool:
        return all(math.isinf(k) for _, k in self.blocks)


@dataclass(frozen=True)
class AdaptiveCs:
    """Carrier sensing whose per-node threshold follows the adaptive rule.

    For IPCS the power step counted by a node is ``t_cs - N`` of its current
    threshold. ``neighbor_radius`` sets who hears a hidden-node warning and
    defaults to the maximal decodable distance.
    """

    mechanism: Mechanism
    params: AdaptiveParams
    neighbor_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))


@dataclass
class LinkStats:
    link_id: object
    goodput: float = 0.0
    tx_attempts: int = 0
    successes: int = 0
    failures: int = 0
    data_failures: int = 0
    ack_failures: int = 0
    drops: int = 0
    threshold_trace: list = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        done = self.successes + self.failures
        return self.failures / done if done else 0.0


@dataclass
class SimResult:
    stats: list[LinkStats]
    duration: float
    events: list[tuple[float, object, str, str]]
    traces: list[tuple[float, object, float]]
    warnings_emitted: int = 0
    warning_broadcasts: int = 0
    warning_deliveries: int = 0
    gain_blocks: list[tuple[float, np.ndarray]] = field(default_factory=list)

    @property
    def warning_overhead_bits(self) -> int:
        return self.warning_broadcasts * WARNING_BITS


class _Ev(enum.IntEnum):
    # order of events scheduled for the same instant
    EXCH_END = 0
    DATA_END = 1
    ACK_START = 2
    BLOCK = 3
    WARN = 4
    DENY = 5
    EXPIRE = 6


def incremental_power(power_matrix: np.ndarray, source: int, starting: bool) -> np.ndarray:
    """Signed power change seen by every node when ``source`` starts or stops."""
    row = power_matrix[source]
    return row.copy() if starting else -row


def _power_matrix(points: np.ndarray, channel: ChannelParams, gains: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, 1.0)
    if np.any(dist == 0):
        raise SingularPathLoss("two distinct nodes share a position")
    pw = channel.power_p * gains * dist ** (-channel.alpha)
    np.fill_diagonal(pw, 0.0)
    return pw


class _Engine:
    def __init__(self, links, channel, mac, cs, fading, duration, seed, record_events):
        self.links = list(links)
        n = self.n = len(self.links)
        self.channel = channel
        self.mac = mac
        self.fading = fading
        self.duration = duration
        self.end_us = duration * 1e6
        self.record = record_events
        seq = np.random.SeedSequence(seed)
        backoff_seq, fading_seq = seq.spawn(2)
        self.rng = np.random.default_rng(backoff_seq)
        self.fading_rng = np.random.default_rng(fading_seq)

        self.points = np.array(
            [(l.tx.x, l.tx.y) for l in self.links] + [(l.rx.x, l.rx.y) for l in self.links], dtype=float
        )
        self.gain_blocks = []
        self._draw_gains(0, fading.blocks[0][1])

        self.adaptive = cs if isinstance(cs, AdaptiveCs) else None
        self.mechanism = cs.mechanism
        if self.adaptive:
            ap = cs.params
            self.node_state = [NodeAdaptiveState.fresh(ap) for _ in range(n)]
            self.thr = np.full(n, ap.t_cs_init)
            radius = cs.neighbor_radius
            if radius is None:
                if channel.noise_n <= 0:
                    raise ConfigError("noise-free channel needs an explicit warning neighbor radius")
                radius = max_tx_distance(channel)
            self.graph = neighbor_graph(self.points[:n], radius)
            self.warn_seq = [0] * n
        else:
            if cs.mechanism is Mechanism.CPCS:
                self.thr = np.full(n, cs.t_cs)
            else:
                self.thr = np.full(n, channel.power_p * cs.r_cs ** (-channel.alpha) + channel.noise_n)
        if self.mechanism is Mechanism.IPCS and np.any(self.thr <= channel.noise_n):
            raise ConfigError("IPCS power step must be positive")

        self.stats = [LinkStats(l.id) for l in self.links]
        self.events = []
        self.traces = []
        self.warnings_emitted = 0
        self.broadcasts = 0
        self.deliveries = 0

        self.heap = []
        self.counter = 0
        self.in_exchange = np.zeros(n, dtype=bool)
        self.busy = np.zeros(n, dtype=bool)
        self.idle_since = np.zeros(n)
        self.backoff = np.zeros(n)
        self.cw = np.full(n, mac.cw_min)
        self.retries = np.zeros(n, dtype=int)
        self.expire_ver = np.zeros(n, dtype=int)
        self.deny_ver = np.zeros(n, dtype=int)
        self.held: dict[int, np.ndarray] = {}  # link -> IPCS step flags it raised
        self.ipcs_count = np.zeros(n, dtype=int)
        # frames on the air, indexed by their emitting point (tx k or rx n + k)
        self.emitters: list[int] = []
        self.frame_rx = np.zeros(2 * n, dtype=int)
        self.frame_min = np.full(2 * n, math.inf)
        self.data_ok = np.zeros(n, dtype=bool)

    # -- bookkeeping ---------------------------------------------------------

    def _log(self, t, k, kind, detail=""):
        if self.record:
            self.events.append((t, self.links[k].id, kind, detail))

    def _trace(self, t, k):
        value = float(self.thr[k])
        self.traces.append((t, self.links[k].id, value))
        self.stats[k].threshold_trace.append((t, value))

    def _push(self, t, kind, node, version=0):
        self.counter += 1
        heapq.heappush(self.heap, (t, int(kind), node, self.counter, version))

    def _draw_gains(self, t, k_a):
        size = (2 * self.n, 2 * self.n)
        g = np.asarray(sample_rician_gain(k_a, self.fading_rng, size), dtype=float)
        self.pw = _power_matrix(self.points, self.channel, g)
        self.pw_tt = np.ascontiguousarray(self.pw[: self.n, : self.n])
        self.gain_blocks.append((t, g))

    def _new_backoff(self, k):
        slots = self.rng.integers(0, self.cw[k] + 1) + self.rng.random()
        self.backoff[k] = slots * self.mac.slot_us

    # -- channel state -------------------------------------------------------

    def _sensed(self):
        if not self.held:
            return np.full(self.n, self.channel.noise_n)
        rows = self.pw_tt[sorted(self.held)]
        return self.channel.noise_n + rows.sum(axis=0)

    def _update_frames(self):
        if not self.emitters:
            return
        em = np.array(self.emitters)
        rx = self.frame_rx[em]
        m = self.pw[em[:, None], rx[None, :]]
        signal = m.diagonal().copy()
        np.fill_diagonal(m, 0.0)
        den = self.channel.noise_n + m.sum(axis=0)
        with np.errstate(divide="ignore"):
            sinr = np.where(den > 0, signal / np.where(den > 0, den, 1.0), math.inf)
        self.frame_min[em] = np.minimum(self.frame_min[em], sinr)

    def _start_emitting(self, point, rx):
        bisect.insort(self.emitters, point)
        self.frame_rx[point] = rx
        self.frame_min[point] = math.inf
        self._update_frames()

    def _stop_emitting(self, point) -> bool:
        self.emitters.remove(point)
        ok = self.frame_min[point] >= self.channel.beta_sinr
        self._update_frames()
        return bool(ok)

    def _refresh(self, now):
        if self.mechanism is Mechanism.CPCS:
            busy_now = self._sensed() > self.thr
        else:
            busy_now = self.ipcs_count > 0
        changed = np.nonzero((busy_now != self.busy) & ~self.in_exchange)[0]
        for k in changed:
            if busy_now[k]:
                idle = now - self.idle_since[k] - self.mac.difs_us
                if idle > 0:
                    self.backoff[k] = max(0.0, self.backoff[k] - idle)
                self.busy[k] = True
                self.expire_ver[k] += 1
                self._start_deny_clock(now, k)
            else:
                self.busy[k] = False
                self.idle_since[k] = now
                self.expire_ver[k] += 1
                self.deny_ver[k] += 1
                self._push(now + self.mac.difs_us + self.backoff[k], _Ev.EXPIRE, k, self.expire_ver[k])

    def _start_deny_clock(self, now, k):
        if not self.adaptive:
            return
        self.deny_ver[k] += 1
        ap = self.adaptive.params
        if self.thr[k] > ap.t_max - ap.delta_s and self.node_state[k].denied_streak >= ap.n_slot:
            return  # capped: further denials cannot change anything
        self._push(now + self.mac.exchange_us, _Ev.DENY, k, self.deny_ver[k])

    # -- adaptive control ----------------------------------------------------

    def _set_state(self, now, k, state):
        self.node_state[k] = state
        if state.t_cs_current != self.thr[k]:
            self.thr[k] = state.t_cs_current
            self._trace(now, k)
            self._log(now, k, "threshold", repr(float(self.thr[k])))
            return True
        return False

    def _outcome(self, now, k, outcome):
        if not self.adaptive:
            return
        state, emit = on_slot_outcome(self.node_state[k], outcome, self.adaptive.params)
        self._set_state(now, k, state)
        if emit:
            self.warnings_emitted += 1
            w = HnWarning(k, self.warn_seq[k], self.adaptive.params.h_w)
            self.warn_seq[k] += 1
            deliveries = propagate(w, k, self.graph)
            self.broadcasts += broadcast_count(deliveries)
            self.deliveries += len(deliveries)
            self._log(now, k, "warning", str(w.sequence))
            for node, copy in sorted(deliveries, key=lambda d: d[0]):
                hops = w.ttl - copy.ttl + 1
                self.counter += 1
                heapq.heappush(
                    self.heap, (now + hops * self.mac.slot_us, int(_Ev.WARN), node, self.counter, copy)
                )

    # -- event handlers ------------------------------------------------------

    def _on_expire(self, now, k):
        self.in_exchange[k] = True
        self.deny_ver[k] += 1
        self.stats[k].tx_attempts += 1
        self._log(now, k, "data_start")
        if self.mechanism is Mechanism.IPCS:
            step = self.thr - self.channel.noise_n
            flags = self.pw_tt[k] >= step
            flags[k] = False
            self.ipcs_count += flags
        else:
            flags = None
        self.held[k] = flags
        self._start_emitting(k, self.n + k)
        self._push(now + self.mac.data_us, _Ev.DATA_END, k)
        self._push(now + self.mac.exchange_us, _Ev.EXCH_END, k)
        self._refresh(now)

    def _on_data_end(self, now, k):
        ok = self._stop_emitting(k)
        self.data_ok[k] = ok
        self._log(now, k, "data_end", "ok" if ok else "fail")
        if ok:
            self._push(now + self.mac.sifs_us, _Ev.ACK_START, k)

    def _on_ack_start(self, now, k):
        self._log(now, k, "ack_start")
        self._start_emitting(self.n + k, k)

    def _on_exchange_end(self, now, k):
        st = self.stats[k]
        if self.data_ok[k]:
            ack_ok = self._stop_emitting(self.n + k)
            self._log(now, k, "ack_end", "ok" if ack_ok else "fail")
        else:
            ack_ok = False
        if ack_ok:
            st.successes += 1
            self.cw[k] = self.mac.cw_min
            self.retries[k] = 0
        else:
            st.failures += 1
            if self.data_ok[k]:
                st.ack_failures += 1
            else:
                st.data_failures += 1
            self.retries[k] += 1
            if self.retries[k] > self.mac.retry_limit:
                st.drops += 1
                self._log(now, k, "drop")
                self.cw[k] = self.mac.cw_min
                self.retries[k] = 0
            else:
                self.cw[k] = min(2 * (self.cw[k] + 1) - 1, self.mac.cw_max)
        flags = self.held.pop(k)
        if flags is not None:
            self.ipcs_count -= flags
        self.in_exchange[k] = False
        self.busy[k] = True  # re-enters contention through the busy -> idle path
        self._new_backoff(k)
        self._outcome(now, k, SlotOutcome.ACKED if ack_ok else SlotOutcome.NO_ACK)
        self._refresh(now)
        if self.busy[k]:
            self._start_deny_clock(now, k)

    def _on_deny(self, now, k):
        state, _ = on_slot_outcome(self.node_state[k], SlotOutcome.DENIED, self.adaptive.params)
        if self._set_state(now, k, state):
            self._refresh(now)
        if self.busy[k] and not self.in_exchange[k]:
            self._start_deny_clock(now, k)

    def _on_warning(self, now, k, w):
        state, _ = on_warning_received(self.node_state[k], w, self.adaptive.params)
        if self._set_state(now, k, state):
            self._refresh(now)

    def _on_block(self, now, idx):
        self._draw_gains(now, self.fading.blocks[idx][1])
        self._log(now, 0, "fading_block", str(idx))
        self._update_frames()
        self._refresh(now)

    # -- main loop -----------------------------------------------------------

    def run(self) -> SimResult:
        n = self.n
        if self.adaptive:
            for k in range(n):
                self._trace(0.0, k)
                self._log(0.0, k, "threshold", repr(float(self.thr[k])))
        for idx, (start, _) in enumerate(self.fading.blocks[1:], start=1):
            self._push(start * 1e6, _Ev.BLOCK, idx)
        for k in range(n):
            self._new_backoff(k)
        self.busy[:] = True
        self._refresh(0.0)
        for k in np.nonzero(self.busy)[0]:
            self._start_deny_clock(0.0, k)

        while self.heap:
            t, kind, k, _, tag = heapq.heappop(self.heap)
            if t > self.end_us:
                break
            if kind == _Ev.EXPIRE:
                if tag == self.expire_ver[k] and not self.busy[k] and not self.in_exchange[k]:
                    self._on_expire(t, k)
            elif kind == _Ev.DATA_END:
                self._on_data_end(t, k)
            elif kind == _Ev.ACK_START:
                self._on_ack_start(t, k)
            elif kind == _Ev.EXCH_END:
                self._on_exchange_end(t, k)
            elif kind == _Ev.DENY:
                if tag == self.deny_ver[k] and self.busy[k] and not self.in_exchange[k]:
                    self._on_deny(t, k)
            elif kind == _Ev.WARN:
                self._on_warning(t, k, tag)
            elif kind == _Ev.BLOCK:
                self._on_block(t, k)

        seconds = self.duration
        for st in self.stats:
            st.goodput = st.successes * self.mac.payload_bits / seconds
        return SimResult(
            self.stats,
            seconds,
            self.events,
            self.traces,
            self.warnings_emitted,
            self.broadcasts,
            self.deliveries,
            self.gain_blocks,
        )


def run(
    topology,
    channel: ChannelParams,
    mac: MacParams,
    cs,
    fading: FadingParams | None = None,
    duration: float = 1.0,
    seed: int = 0,
    record_events: bool = False,
) -> SimResult:
    """Simulate ``duration`` seconds of saturated contention on ``topology``.

    ``cs`` is a :class:`CsConfig` for static sensing or an :class:`AdaptiveCs`.
    """
    links = list(topology)
    if not links:
        raise ConfigError("topology is empty")
    if not duration > 0:
        raise ConfigError("duration must be positive")
    if len({l.id for l in links}) != len(links):
        raise ConfigError("link ids must be unique")
    mac.check_channel(channel)
    if isinstance(cs, CsConfig):
        try:
            cs.validate(channel)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif not isinstance(cs, AdaptiveCs):
        raise ConfigError("cs must be a CsConfig or AdaptiveCs")
    fading = fading or FadingParams()
    return _Engine(links, channel, mac, cs, fading, duration, seed, record_events).run()


# -- exports and offline checks ----------------------------------------------

STATS_COLUMNS = ["link_id", "goodput_bps", "attempts", "successes", "failures", "failure_rate"]


def write_stats(path, stats) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(STATS_COLUMNS)
        for s in stats:
            wr.writerow([s.link_id, repr(s.goodput), s.tx_attempts, s.successes, s.failures, repr(s.failure_rate)])


def write_events(path, events) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["time_us", "node_id", "event_kind", "detail"])
        for t, node, kind, detail in events:
            wr.writerow([repr(float(t)), node, kind, detail])


def read_events(path) -> list[tuple[float, str, str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [(float(r["time_us"]), r["node_id"], r["event_kind"], r["detail"]) for r in csv.DictReader(fh)]


def write_traces(path, traces) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["time_us", "node_id", "t_cs_watts"])
        for t, node, value in traces:
            wr.writerow([repr(float(t)), node, repr(float(value))])


def stats_from_events(events, link_ids, duration: float, payload_bits: int) -> list[LinkStats]:
    """Rebuild per-link counters from an event log alone."""
    by_id = {str(i): LinkStats(i) for i in link_ids}
    data_ok = {}
    for t, node, kind, detail in events:
        st = by_id.get(str(node))
        if st is None:
            continue
        if kind == "threshold":
            st.threshold_trace.append((t, float(detail)))
        elif kind == "data_start":
            st.tx_attempts += 1
        elif kind == "data_end":
            data_ok[str(node)] = detail == "ok"
            if detail != "ok":
                st.failures += 1
                st.data_failures += 1
        elif kind == "ack_end":
            if detail == "ok":
                st.successes += 1
            else:
                st.failures += 1
                st.ack_failures += 1
        elif kind == "drop":
            st.drops += 1
    for st in by_id.values():
        st.goodput = st.successes * payload_bits / duration
    return list(by_id.values())


def replay_verdicts(events, links, channel: ChannelParams) -> list[tuple[float, str, str, bool]]:
    """Recompute every DATA and ACK verdict from the log with the channel model.

    Only meaningful without fading (unit gains). Returns
    (end time, link id, frame kind, success) per finished frame.
    """
    by_id = {str(l.id): l for l in links}
    on_air: dict[tuple[str, str], float] = {}  # (link id, 'data'|'ack') -> running min SINR

    def emitters():
        out = []
        for lid, kind in on_air:
            link = by_id[lid]
            out.append(link.tx if kind == "data" else link.rx)
        return out

    def refresh():
        pts = emitters()
        for key in on_air:
            lid, kind = key
            link = by_id[lid]
            own, rx = (link.tx, link.rx) if kind == "data" else (link.rx, link.tx)
            others = [p for p in pts if p != own]
            on_air[key] = min(on_air[key], sinr_at(rx, own, others, channel))

    verdicts = []
    frame_end = {"data_end": "data", "ack_end": "ack"}
    frame_start = {"data_start": "data", "ack_start": "ack"}
    for t, node, kind, _ in events:
        node = str(node)
        if kind in frame_start:
            on_air[(node, frame_start[kind])] = math.inf
            refresh()
        elif kind in frame_end:
            key = (node, frame_end[kind])
            ok = on_air.pop(key) >= channel.beta_sinr
            refresh()
            verdicts.append((t, node, frame_end[kind], ok))
    return verdicts


def logged_verdicts(events) -> list[tuple[float, str, str, bool]]:
    kinds = {"data_end": "data", "ack_end": "ack"}
    return [(t, str(node), kinds[kind], detail == "ok") for t, node, kind, detail in events if kind in kinds]
