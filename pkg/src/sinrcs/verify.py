"""Safety checking of carrier-sensing settings and static-threshold sweeps."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .carrier_sense import CsConfig, Mechanism, _tx_power, cpcs_sequence_admits, ipcs_admits
from .channel import ChannelParams, Link, infeasible_links
from .dcf import FadingParams, MacParams, run
from .metrics import jain_index
from .topology import TopologySpec, generate, links_for_density

EXHAUSTIVE_LIMIT = 10
RANDOM_SAMPLES = 10_000


class TooLargeForExhaustive(ValueError):
    pass


@dataclass(frozen=True)
class Counterexample:
    sequence: tuple[Link, ...]
    link: Link

    def describe(self) -> str:
        order = " -> ".join(str(l.id) for l in self.sequence)
        return f"sequence {order} admitted, state infeasible at {self.link.id}"


def _admits_next(prefix: list[Link], cand: Link, cs: CsConfig, params: ChannelParams) -> bool:
    if cs.mechanism is Mechanism.CPCS:
        measured = params.noise_n + sum(_tx_power(params, j, cand) for j in prefix)
        return measured <= cs.t_cs
    return all(j.tx.dist(cand.tx) >= cs.r_cs for j in prefix)


def check_interference_safety(
    topology, cs: CsConfig, params: ChannelParams
) -> Counterexample | None:
    """Search every admissible transmission sequence for an infeasible state.

    Admission is prefix-closed, and whether a link can join depends only on
    the set already on the air, so sets are explored breadth-first, each
    through the first sequence that reaches it. The smallest violating set is
    reported together with one sequence that admits it.
    """
    links = list(topology)
    if len(links) > EXHAUSTIVE_LIMIT:
        raise TooLargeForExhaustive(
            f"{len(links)} links exceed the exhaustive limit of {EXHAUSTIVE_LIMIT}; use random_safety_search"
        )
    frontier = [()]
    seen = {0}
    while frontier:
        nxt = []
        for seq in frontier:
            mask = sum(1 << k for k in seq)
            prefix = [links[k] for k in seq]
            for k, cand in enumerate(links):
                if mask >> k & 1 or (mask | 1 << k) in seen:
                    continue
                if not _admits_next(prefix, cand, cs, params):
                    continue
                seen.add(mask | 1 << k)
                state = prefix + [cand]
                bad = infeasible_links(state, params)
                if bad:
                    return Counterexample(tuple(state), bad[0])
                nxt.append(seq + (k,))
        frontier = nxt
    return None


def random_safety_search(
    topology, cs: CsConfig, params: ChannelParams, samples: int = RANDOM_SAMPLES, seed: int = 0
) -> Counterexample | None:
    """Draw random (subset, order) pairs; report the first admitted infeasible one."""
    links = list(topology)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        size = int(rng.integers(1, len(links) + 1))
        seq = [links[k] for k in rng.permutation(len(links))[:size]]
        if cs.mechanism is Mechanism.CPCS:
            ok = cpcs_sequence_admits(seq, cs.t_cs, params)
        else:
            ok = ipcs_admits(seq, cs.r_cs)
        if ok:
            bad = infeasible_links(seq, params)
            if bad:
                return Counterexample(tuple(seq), bad[0])
    return None


# -- static-threshold sweep --------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    density: float
    t_cs: float
    goodput: float
    jain: float
    failure_rate: float
    link_goodputs: tuple = field(default=(), repr=False)


@dataclass
class SweepResult:
    cells: list[SweepCell]

    def best(self, density: float, key: str) -> SweepCell:
        cand = [c for c in self.cells if c.density == density]
        return max(cand, key=lambda c: (getattr(c, key), -c.t_cs))

    def curves(self) -> list[tuple[float, float, float]]:
        out = []
        for d in sorted({c.density for c in self.cells}):
            out.append((d, self.best(d, "goodput").t_cs, self.best(d, "jain").t_cs))
        return out


@dataclass(frozen=True)
class SweepSetup:
    channel: ChannelParams
    mac: MacParams = MacParams()
    duration: float = 0.2
    d_max: float = 250.0
    area: tuple[float, float] = (3000.0, 3000.0)
    kind: str = "uniform"


def _one_instance(args):
    setup, density, t_cs, topo_seed, sim_seed = args
    n = links_for_density(density, setup.d_max, setup.area)
    links = generate(
        TopologySpec(setup.kind, n, setup.area, (min(10.0, setup.d_max), setup.d_max), seed=topo_seed)
    )
    res = run(links, setup.channel, setup.mac, CsConfig.cpcs(t_cs), FadingParams(), setup.duration, sim_seed)
    g = [s.goodput for s in res.stats]
    done = sum(s.successes + s.failures for s in res.stats)
    fr = sum(s.failures for s in res.stats) / done if done else 0.0
    jain = jain_index(g) if any(g) else 0.0
    return sum(g), jain, fr, tuple(g)


def instance_seed(master: int, index: int) -> int:
    """Independent simulation seed for grid instance ``index``."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def benchmark_sweep(
    densities, t_cs_grid, seeds, setup: SweepSetup, jobs: int = 1
) -> SweepResult:
    """Uniform static CPCS at every (density, t_cs) grid point, averaged over ``seeds``.

    The topology for a (density, seed) pair is shared by every t_cs so the
    threshold is the only varying factor.
    """
    densities = [float(d) for d in densities]
    grid = [float(t) for t in t_cs_grid]
    seeds = list(seeds)
    if not densities or not grid or not seeds:
        raise ValueError("sweep grids must be non-empty")
    tasks = []
    for d in densities:
        for t in grid:
            for s in seeds:
                tasks.append((setup, d, t, s, instance_seed(s, len(tasks))))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_instance, tasks))
    else:
        results = [_one_instance(t) for t in tasks]
    cells = []
    k = 0
    for d in densities:
        for t in grid:
            chunk = results[k : k + len(seeds)]
            k += len(seeds)
            cells.append(
                SweepCell(
                    d,
                    t,
                    float(np.mean([c[0] for c in chunk])),
                    float(np.mean([c[1] for c in chunk])),
                    float(np.mean([c[2] for c in chunk])),
                    sum((c[3] for c in chunk), ()),
                )
            )
    return SweepResult(cells)


def write_surface(path, result: SweepResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["density", "t_cs", "goodput_bps", "jain", "failure_rate"])
        for c in result.cells:
            wr.writerow([repr(c.density), repr(c.t_cs), repr(c.goodput), repr(c.jain), repr(c.failure_rate)])


def write_curves(path, result: SweepResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["density", "argmax_t_cs_goodput", "argmax_t_cs_fairness"])
        for d, tg, tf in result.curves():
            wr.writerow([repr(d), repr(tg), repr(tf)])


def log_grid(lo: float, hi: float, points: int) -> list[float]:
    if points == 1:
        return [float(lo)]
    return [float(v) for v in np.geomspace(lo, hi, points)]


def is_interference_safe(topology, cs: CsConfig, params: ChannelParams) -> bool:
    return check_interference_safety(topology, cs, params) is None

