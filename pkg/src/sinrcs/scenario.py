"""Scenario files: flat ``key = value`` text describing one simulation setup."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .adaptive import AdaptiveParams
from .bounds import i_bound
from .carrier_sense import (
    CsConfig,
    Mechanism,
    rcs_to_tcs,
    static_cpcs_threshold,
    static_ipcs_range,
)
from .channel import ChannelParams
from .dcf import AdaptiveCs, ConfigError, FadingParams, MacParams
from .topology import TopologySpec, generate, links_for_density, load_topology


@dataclass(frozen=True)
class Scenario:
    scenario_id: str = "default"
    # topology
    topology: str = "uniform"
    topology_file: str = ""
    n_links: int = 100
    densities: tuple[float, ...] = ()
    area_x: float = 3000.0
    area_y: float = 3000.0
    link_min: float = 10.0
    link_max: float = 250.0
    clusters: int = 5
    cluster_spread: float = 150.0
    # channel
    power: float = 0.1
    noise: float = 1e-13
    alpha: float = 4.0
    beta_db: float = 20.0
    # carrier sensing
    mechanism: str = "cpcs"
    mode: str = "static"
    t_cs: float = math.nan
    r_cs: float = math.nan
    dim: int = 2
    legacy_margin_db: float = 20.0
    step_ratio: float = 20.0
    max_ratio: float = 1e4
    m_ack: int = 2
    n_slot: int = 3
    h_w: int = 1
    neighbor_radius: float = math.nan
    # fading
    k_a: float = math.inf
    fading_blocks: str = ""
    # MAC
    slot_us: float = 20.0
    sifs_us: float = 10.0
    difs_us: float = 50.0
    data_rate: float = 11e6
    payload_bytes: int = 1460
    ack_bytes: int = 14
    cw_min: int = 31
    cw_max: int = 1023
    retry_limit: int = 7
    # run
    duration: float = 0.2
    seed: int = 0
    record_events: bool = False

    def __post_init__(self):
        if self.topology not in ("uniform", "clustered", "file"):
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.topology == "file" and not self.topology_file:
            raise ConfigError("topology = file needs topology_file")
        if self.mechanism not in ("cpcs", "ipcs", "legacy"):
            raise ConfigError(f"unknown mechanism {self.mechanism!r}")
        if self.mode not in ("static", "adaptive"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mechanism == "legacy" and self.mode == "adaptive":
            raise ConfigError("the legacy threshold has no adaptive variant")
        if self.dim not in (1, 2):
            raise ConfigError("dim must be 1 or 2")

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams.from_db(self.beta_db, power_p=self.power, noise_n=self.noise, alpha=self.alpha)

    @property
    def mac(self) -> MacParams:
        return MacParams(
            self.slot_us,
            self.sifs_us,
            self.difs_us,
            self.data_rate,
            self.payload_bytes,
            self.ack_bytes,
            self.cw_min,
            self.cw_max,
            self.retry_limit,
            self.beta_db,
        )

    @property
    def area(self) -> tuple[float, float]:
        return (self.area_x, self.area_y)

    def fading(self) -> FadingParams:
        if not self.fading_blocks:
            return FadingParams.constant(self.k_a)
        blocks = []
        for part in self.fading_blocks.split(","):
            start, k = part.split(":")
            blocks.append((float(start), float(k)))
        return FadingParams(tuple(blocks))

    def topology_spec(self, n_links: int | None = None) -> TopologySpec:
        return TopologySpec(
            self.topology,
            self.n_links if n_links is None else n_links,
            self.area,
            (self.link_min, self.link_max),
            self.clusters,
            self.cluster_spread,
            self.seed,
        )

    def links(self, density: float | None = None):
        if self.topology == "file":
            return load_topology(self.topology_file)
        n = None if density is None else links_for_density(density, self.link_max, self.area)
        return generate(self.topology_spec(n))

    def static_threshold(self) -> float:
        """Hidden-node-free CPCS threshold for links up to ``link_max``."""
        return static_cpcs_threshold(self.link_max, self.channel, i_bound(self.alpha, self.dim))

    def static_range(self) -> float:
        return static_ipcs_range(self.link_max, self.channel, i_bound(self.alpha, self.dim))

    def carrier_sense(self):
        ch = self.channel
        if self.mechanism == "legacy":
            return CsConfig.legacy(ch, self.legacy_margin_db)
        mech = Mechanism(self.mechanism)
        if self.mode == "static":
            if mech is Mechanism.CPCS:
                return CsConfig.cpcs(self.t_cs if not math.isnan(self.t_cs) else self.static_threshold())
            return CsConfig.ipcs(self.r_cs if not math.isnan(self.r_cs) else self.static_range())
        if not math.isnan(self.t_cs):
            t_star = self.t_cs
        elif mech is Mechanism.CPCS:
            t_star = self.static_threshold()
        else:
            t_star = rcs_to_tcs(self.static_range(), ch)
        params = AdaptiveParams.from_static(
            t_star, self.step_ratio, self.max_ratio, self.m_ack, self.n_slot, self.h_w
        )
        radius = None if math.isnan(self.neighbor_radius) else self.neighbor_radius
        return AdaptiveCs(mech, params, radius)


def _parse_value(kind, raw: str):
    if kind is bool:
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind == tuple[float, ...]:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    return raw


_TYPES = {"str": str, "int": int, "float": float, "bool": bool, "tuple[float, ...]": tuple[float, ...]}


def parse_config(text: str) -> Scenario:
    """Build a :class:`Scenario` from ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name: _TYPES[f.type] for f in fields(Scenario)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(known[key], raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return Scenario(**values)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


def format_config(sc: Scenario) -> str:
    return "".join(f"{f.name} = {_format_value(getattr(sc, f.name))}\n" for f in fields(Scenario))


def load_config(path) -> Scenario:
    """Read a scenario file; a relative ``topology_file`` is taken relative to it."""
    path = Path(path)
    sc = parse_config(path.read_text(encoding="utf-8"))
    if sc.topology_file and not Path(sc.topology_file).is_absolute():
        sc = replace(sc, topology_file=str(path.parent / sc.topology_file))
    return sc


def with_overrides(sc: Scenario, **kw) -> Scenario:
    return replace(sc, **{k: v for k, v in kw.items() if v is not None})
