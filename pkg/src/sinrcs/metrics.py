"""Aggregate goodput, Jain fairness, failure rate and starvation ratio."""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

import numpy as np


@dataclass(frozen=True)
class MetricReport:
    aggregate_goodput: float
    jain_index: float
    failure_rate: float
    starvation_ratio: float
    rho: float


def jain_index(goodputs) -> float:
    x = np.asarray(goodputs, dtype=float)
    if x.size == 0:
        raise ValueError("need at least one goodput")
    if np.any(x < 0):
        raise ValueError("goodputs must be non-negative")
    sq = float(np.sum(x * x))
    if sq == 0:
        raise ValueError("Jain index undefined when every goodput is zero")
    return float(np.sum(x)) ** 2 / (x.size * sq)


def starvation_ratio(goodputs, rho: float) -> float:
    """Fraction of links whose goodput is at most ``rho``."""
    x = np.asarray(goodputs, dtype=float)
    if x.size == 0:
        raise ValueError("need at least one goodput")
    return float(np.count_nonzero(x <= rho)) / x.size


def aggregate_goodput(stats) -> float:
    return float(sum(s.goodput for s in stats))


def failure_rate(stats) -> float:
    done = sum(s.successes + s.failures for s in stats)
    if done == 0:
        return 0.0
    return sum(s.failures for s in stats) / done


def report(stats, rho: float | None = None) -> MetricReport:
    """Scalar metrics over per-link stats; ``rho`` defaults to the median goodput."""
    g = [s.goodput for s in stats]
    if rho is None:
        rho = float(np.median(g))
    jain = jain_index(g) if any(v > 0 for v in g) else 0.0
    return MetricReport(aggregate_goodput(stats), jain, failure_rate(stats), starvation_ratio(g, rho), rho)


REPORT_COLUMNS = [
    "scenario_id",
    "density",
    "mechanism",
    "aggregate_goodput_bps",
    "jain",
    "failure_rate",
    "starvation_ratio",
]


def write_reports(path, rows) -> None:
    """``rows``: iterables of (scenario_id, density, mechanism, MetricReport)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(REPORT_COLUMNS)
        for sid, density, mech, rep in rows:
            wr.writerow(
                [sid, repr(float(density)), mech, repr(rep.aggregate_goodput), repr(rep.jain_index),
                 repr(rep.failure_rate), repr(rep.starvation_ratio)]
            )


def report_fields() -> list[str]:
    return [f.name for f in fields(MetricReport)]
