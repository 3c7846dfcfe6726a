"""Command-line entry point.

Exit codes: 0 success or no counterexample, 1 counterexample found,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import bounds, dcf, metrics, plotting, verify
from .carrier_sense import (
    CsConfig,
    max_tx_distance,
    static_cpcs_threshold,
    static_ipcs_range,
)
from .channel import ChannelParams
from .scenario import Scenario, load_config
from .topology import TopologySpec, generate, node_density, ordering_counterexample, save_topology, write_topology

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_CONFIG = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _atomic(path: Path, write) -> None:
    """Write through a temporary sibling so readers never see a partial file."""
    tmp = path.with_name(path.name + ".tmp")
    write(tmp)
    os.replace(tmp, path)


# -- bounds ------------------------------------------------------------------


def cmd_bounds(args) -> int:
    series = {"1": (1,), "2": (2,), "both": (1, 2)}[args.series]
    for a in args.alpha:
        if 2 in series and not a > 2:
            raise ValueError(f"alpha = {a:g} unsupported for the 2-D series (needs alpha > 2)")
        if 1 in series and not a >= 2:
            raise ValueError(f"alpha = {a:g} unsupported for the 1-D series (needs alpha >= 2)")
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["series", "alpha", "value", "terms_used", "truncation_estimate"])
    tables = {1: (bounds.i_bar_1, bounds.TABULATED_TERMS_1D), 2: (bounds.i_bar_2, bounds.TABULATED_TERMS_2D)}
    for dim in series:
        fn, table = tables[dim]
        for a in args.alpha:
            r = fn(a, args.tolerance, table if args.table else args.terms)
            out.writerow([f"i_bar_{dim}", repr(a), f"{r.value:.{args.digits}f}", r.terms_used, f"{r.truncation_estimate:.3e}"])
    return EXIT_OK


# -- threshold ---------------------------------------------------------------


def cmd_threshold(args) -> int:
    params = ChannelParams.from_db(args.beta_db, power_p=args.power, noise_n=args.noise, alpha=args.alpha)
    if params.noise_n > 0 and args.dmax > max_tx_distance(params):
        print(
            f"warning: link length {args.dmax:g} m exceeds the maximal transmission distance "
            f"{max_tx_distance(params):.6g} m",
            file=sys.stderr,
        )
    ib = bounds.i_bound(args.alpha, args.dim)
    t_cs = static_cpcs_threshold(args.dmax, params, ib)
    r_cs = static_ipcs_range(args.dmax, params, ib)
    print(f"i_bound = {ib!r}")
    print(f"t_cs = {t_cs!r}")
    print(f"r_cs = {r_cs!r}")
    return EXIT_OK


# -- simulate ----------------------------------------------------------------


def _mechanism_label(sc: Scenario) -> str:
    return sc.mechanism if sc.mechanism == "legacy" else f"{sc.mode}-{sc.mechanism}"


def _simulate_one(job):
    sc, density, index, out, suffix = job
    links = sc.links(density)
    cs = sc.carrier_sense()
    res = dcf.run(links, sc.channel, sc.mac, cs, sc.fading(), sc.duration, verify.instance_seed(sc.seed, index), sc.record_events)
    out = Path(out)
    _atomic(out / f"stats{suffix}.csv", lambda p: dcf.write_stats(p, res.stats))
    if res.traces:
        _atomic(out / f"traces{suffix}.csv", lambda p: dcf.write_traces(p, res.traces))
    if sc.record_events:
        _atomic(out / f"events{suffix}.csv", lambda p: dcf.write_events(p, res.events))
    rep = metrics.report(res.stats)
    d = node_density(links, sc.link_max, sc.area)
    t_star = cs.params.t_cs_init if isinstance(cs, dcf.AdaptiveCs) else None
    return (sc.scenario_id, d, _mechanism_label(sc), rep), t_star, suffix


def cmd_simulate(args) -> int:
    sc = load_config(args.config)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if sc.densities:
        jobs = [(sc, d, k, str(out), f"_{k}") for k, d in enumerate(sc.densities)]
    else:
        jobs = [(sc, None, 0, str(out), "")]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_simulate_one, jobs))
    else:
        results = [_simulate_one(j) for j in jobs]
    rows = [r[0] for r in results]
    _atomic(out / "report.csv", lambda p: metrics.write_reports(p, rows))
    plotting.plot_report(out / "report.csv", out / "goodput.svg", out / "jain.svg")
    for _, t_star, suffix in results:
        if t_star is not None:
            plotting.plot_traces(out / f"traces{suffix}.csv", out / f"thresholds{suffix}.svg", t_star)
    for sid, d, mech, rep in rows:
        print(
            f"{sid} density={d:.4g} {mech}: goodput={rep.aggregate_goodput / 1e6:.4f} Mb/s "
            f"jain={rep.jain_index:.4f} failure_rate={rep.failure_rate:.4f} starvation={rep.starvation_ratio:.4f}"
        )
    return EXIT_OK


# -- sweep -------------------------------------------------------------------


def cmd_sweep(args) -> int:
    sc = load_config(args.config) if args.config else Scenario()
    if args.tcs:
        grid = args.tcs
    else:
        t_star = sc.static_threshold()
        grid = [t_star * r for r in args.tcs_ratios]
    densities = args.densities or list(sc.densities) or [1.0]
    setup = verify.SweepSetup(sc.channel, sc.mac, sc.duration, sc.link_max, sc.area, sc.topology)
    res = verify.benchmark_sweep(densities, grid, args.seeds, setup, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _atomic(out / "surface.csv", lambda p: verify.write_surface(p, res))
    _atomic(out / "curves.csv", lambda p: verify.write_curves(p, res))
    plotting.plot_surface(out / "surface.csv", out / "sweep_goodput.svg", "goodput_bps")
    plotting.plot_surface(out / "surface.csv", out / "sweep_jain.svg", "jain")
    for d, tg, tf in res.curves():
        print(f"density={d:g} best_goodput_t_cs={tg!r} best_fairness_t_cs={tf!r}")
    return EXIT_OK


# -- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    sc = load_config(args.config) if args.config else Scenario()
    if sc.mode != "static":
        raise ValueError("verify checks static carrier-sensing settings only")
    cs = sc.carrier_sense()
    params = sc.channel
    for k in range(args.topologies):
        spec = TopologySpec(
            sc.topology if sc.topology != "file" else "uniform",
            args.n_links,
            (args.area, args.area),
            (sc.link_min, sc.link_max),
            sc.clusters,
            sc.cluster_spread,
            args.seed + k,
        )
        links = generate(spec)
        if args.mode == "exhaustive":
            found = verify.check_interference_safety(links, cs, params)
        else:
            found = verify.random_safety_search(links, cs, params, args.samples, args.seed + k)
        if found is not None:
            print(f"topology seed {args.seed + k}: {found.describe()}")
            return EXIT_COUNTEREXAMPLE
    print(f"no counterexample in {args.topologies} topologies")
    return EXIT_OK


# -- counterexample ----------------------------------------------------------


def cmd_counterexample(args) -> int:
    links, order = ordering_counterexample(args.tcs, args.alpha, args.power, 10 ** (args.beta_db / 10))
    params = ChannelParams.from_db(args.beta_db, power_p=args.power, noise_n=0.0, alpha=args.alpha)
    if args.out:
        path = Path(args.out)
        _atomic(path, lambda p: save_topology(links, p))
    else:
        write_topology(sys.stdout, links)
    found = verify.check_interference_safety(links, CsConfig.cpcs(args.tcs), params)
    if found is None:
        print("no counterexample")
        return EXIT_OK
    print(f"sequence admitted, state infeasible at {found.link.id}")
    return EXIT_COUNTEREXAMPLE


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sinrcs", description="Interference-safe carrier sensing toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="upper bounds on the maximal interference level")
    b.add_argument("--alpha", type=_floats, default=[2, 3, 4, 5, 6], help="comma-separated path-loss exponents")
    b.add_argument("--tolerance", type=float, default=1e-6)
    b.add_argument("--terms", type=int, default=None, help="fixed number of outer terms")
    b.add_argument("--table", action="store_true", help="use the fixed term counts of the reference tables")
    b.add_argument("--series", choices=("1", "2", "both"), default="both")
    b.add_argument("--digits", type=int, default=7)
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("threshold", help="static hidden-node-free t_cs and r_cs")
    t.add_argument("--dmax", type=float, required=True)
    t.add_argument("--alpha", type=float, default=4.0)
    t.add_argument("--beta-db", type=float, default=20.0)
    t.add_argument("--power", type=float, default=0.1)
    t.add_argument("--noise", type=float, default=1e-13)
    t.add_argument("--dim", type=int, choices=(1, 2), default=2)
    t.set_defaults(func=cmd_threshold)

    s = sub.add_parser("simulate", help="run a scenario file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="uniform static t_cs over a density grid")
    w.add_argument("--config", default=None)
    w.add_argument("--out", required=True)
    w.add_argument("--densities", type=_floats, default=None)
    w.add_argument("--tcs", type=_floats, default=None, help="thresholds in watts")
    w.add_argument("--tcs-ratios", type=_floats, default=[1, 10, 100, 1000, 10000], help="multiples of the static threshold")
    w.add_argument("--seeds", type=_ints, default=[0])
    w.add_argument("--seed", type=int, default=None, help="single seed, overrides --seeds")
    w.add_argument("--jobs", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="search small topologies for unsafe admissions")
    v.add_argument("--config", default=None)
    v.add_argument("--n-links", type=int, default=8)
    v.add_argument("--topologies", type=int, default=100)
    v.add_argument("--area", type=float, default=600.0)
    v.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    v.add_argument("--samples", type=int, default=verify.RANDOM_SAMPLES)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("counterexample", help="three links showing the ordering effect")
    c.add_argument("--tcs", type=float, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--power", type=float, default=1.0)
    c.add_argument("--beta-db", type=float, default=20.0)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_counterexample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and args.command == "sweep":
        args.seeds = [args.seed]
    try:
        return args.func(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
