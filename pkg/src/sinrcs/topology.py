"""Random link topologies, the ordering counterexample and density helpers."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import _solve_unit_power
from .carrier_sense import cpcs_sequence_admits
from .channel import ChannelParams, Link, Point


@dataclass(frozen=True)
class TopologySpec:
    kind: str = "uniform"
    n_links: int = 100
    area: tuple[float, float] = (3000.0, 3000.0)
    link_len: tuple[float, float] = (10.0, 250.0)
    clusters: int = 5
    spread: float = 150.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "clustered"):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.n_links < 0:
            raise ValueError("n_links must be non-negative")
        lo, hi = self.link_len
        if not 0 < lo <= hi:
            raise ValueError("link length range must be positive and ordered")
        if hi > min(self.area):
            raise ValueError("links longer than the area is wide")


def _inside(p, area) -> bool:
    return 0 <= p[0] <= area[0] and 0 <= p[1] <= area[1]


def _attach_receiver(rng, tx, spec: TopologySpec) -> np.ndarray:
    lo, hi = spec.link_len
    while True:
        theta = rng.uniform(0, 2 * math.pi)
        length = rng.uniform(lo, hi)
        rx = tx + length * np.array([math.cos(theta), math.sin(theta)])
        if _inside(rx, spec.area):
            return rx


def _place(spec: TopologySpec, rng, draw_tx) -> list[Link]:
    links = []
    for i in range(spec.n_links):
        tx = draw_tx()
        rx = _attach_receiver(rng, tx, spec)
        links.append(Link(i, Point(*tx), Point(*rx)))
    return links


def gen_uniform(spec: TopologySpec) -> list[Link]:
    rng = np.random.default_rng(spec.seed)
    return _place(spec, rng, lambda: rng.uniform((0, 0), spec.area))


def gen_clustered(spec: TopologySpec) -> list[Link]:
    """Transmitters scattered with Gaussian offsets around uniform cluster centers."""
    if spec.clusters < 1:
        raise ValueError("need at least one cluster")
    rng = np.random.default_rng(spec.seed)
    centers = rng.uniform((0, 0), spec.area, size=(spec.clusters, 2))

    def draw():
        c = centers[rng.integers(len(centers))]
        if spec.spread <= 0:
            return c.copy()
        while True:
            tx = c + rng.normal(0.0, spec.spread, 2)
            if _inside(tx, spec.area):
                return tx

    return _place(spec, rng, draw)


def generate(spec: TopologySpec) -> list[Link]:
    return gen_uniform(spec) if spec.kind == "uniform" else gen_clustered(spec)


def _area_m2(area) -> float:
    if isinstance(area, (tuple, list)):
        return float(area[0]) * float(area[1])
    return float(area)


def node_density(topology, d_max: float, area) -> float:
    """Expected number of links whose transmitter falls in one transmission-range disk."""
    return len(topology) * math.pi * d_max**2 / _area_m2(area)


def links_for_density(density: float, d_max: float, area) -> int:
    return max(1, round(density * _area_m2(area) / (math.pi * d_max**2)))


def max_link_length(topology) -> float:
    return max(link.length for link in topology)


def ordering_counterexample(
    t_cs: float, alpha: float, power_p: float = 1.0, beta_sinr: float = 100.0
) -> tuple[list[Link], list[Link]]:
    """Three parallel links on a line that pass ordered CPCS admission but
    overload the middle transmitter.

    Transmitters sit at 0, h and h + l with ``P h^-alpha = t_cs`` and
    ``P (l^-alpha + (h+l)^-alpha) = t_cs`` (noise-free). Receivers are offset
    perpendicularly by a common length chosen so that only the full triple is
    infeasible, and only at the middle link.
    """
    if not t_cs > 0:
        raise ValueError("t_cs must be positive")
    a = alpha
    noise_free = ChannelParams(power_p, 0.0, alpha, beta_sinr)

    def pw(d):
        return power_p * d ** (-a)

    def build(h, l, w):
        xs = (0.0, h, h + l)
        return [Link(f"t{k + 1}", Point(x, 0.0), Point(x, w)) for k, x in enumerate(xs)]

    h = (t_cs / power_p) ** (-1 / a)
    # in units of h the second gap solves u^-a + (1+u)^-a = 1
    l = h * _solve_unit_power(np.array([0.0, 1.0]), a, 1.0)
    # move outwards ulp by ulp until the rounded powers pass the admission test
    while not cpcs_sequence_admits(build(h, l, 1.0)[:2], t_cs, noise_free):
        h = math.nextafter(h, math.inf)
    while not cpcs_sequence_admits(build(h, l, 1.0), t_cs, noise_free):
        l = math.nextafter(l, math.inf)
    mid = pw(h) + 0.5 * (pw(l) + pw(h + l))
    w = (beta_sinr * mid / power_p) ** (-1 / a)
    links = build(h, l, w)
    return links, list(links)


def write_topology(fh, links) -> None:
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(["link_id", "tx_x", "tx_y", "rx_x", "rx_y"])
    for link in links:
        wr.writerow([link.id, repr(link.tx.x), repr(link.tx.y), repr(link.rx.x), repr(link.rx.y)])


def save_topology(links, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_topology(fh, links)


def load_topology(path) -> list[Link]:
    links = []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            lid = row["link_id"]
            lid = int(lid) if lid.lstrip("-").isdigit() else lid
            links.append(
                Link(lid, Point(float(row["tx_x"]), float(row["tx_y"])), Point(float(row["rx_x"]), float(row["rx_y"])))
            )
    return links


def scaled(links, s: float) -> list[Link]:
    return [link.scaled(s) for link in links]


def too_long_links(links, params: ChannelParams) -> list[Link]:
    """Links whose length alone already violates the SINR requirement."""
    if params.noise_n == 0:
        return []
    limit = (params.power_p / (params.beta_sinr * params.noise_n)) ** (1 / params.alpha)
    return [link for link in links if link.length > limit]
