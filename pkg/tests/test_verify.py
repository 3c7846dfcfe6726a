import numpy as np
import pytest

from sinrcs.bounds import i_bound
from sinrcs.carrier_sense import CsConfig, static_cpcs_threshold, static_ipcs_range
from sinrcs.channel import ChannelParams, is_feasible_state
from sinrcs.dcf import MacParams
from sinrcs.topology import TopologySpec, generate, ordering_counterexample
from sinrcs.verify import (
    Counterexample,
    SweepSetup,
    TooLargeForExhaustive,
    benchmark_sweep,
    check_interference_safety,
    instance_seed,
    random_safety_search,
    write_curves,
    write_surface,
)

from oracles import permuted_cpcs_violation

PARAMS = ChannelParams(0.1, 1e-13, 4, 100)
D_MAX = 250.0


def small_topology(n, seed, area=600.0, kind="uniform"):
    return generate(TopologySpec(kind, n, (area, area), (10.0, D_MAX), clusters=2, spread=60.0, seed=seed))


def certified_settings():
    t = static_cpcs_threshold(D_MAX, PARAMS, i_bound(4.0))
    r = static_ipcs_range(D_MAX, PARAMS, i_bound(4.0))
    return CsConfig.cpcs(t), CsConfig.ipcs(r)


@pytest.mark.parametrize("seed", range(15))
def test_certified_settings_have_no_counterexample(seed):
    links = small_topology(10, seed, area=1500.0)
    for cs in certified_settings():
        assert check_interference_safety(links, cs, PARAMS) is None


def test_legacy_threshold_breaks_on_dense_cluster():
    legacy = CsConfig.legacy(PARAMS)
    found = [
        check_interference_safety(small_topology(6, s, area=3000.0, kind="clustered"), legacy, PARAMS)
        for s in range(20)
    ]
    assert any(c is not None for c in found)
    for c in found:
        if c is not None:
            assert not is_feasible_state(c.sequence, PARAMS)


@pytest.mark.parametrize("seed", range(12))
def test_exhaustive_agrees_with_permutation_oracle(seed):
    rng = np.random.default_rng(seed)
    links = small_topology(5, seed, area=900.0)
    t_cs = PARAMS.noise_n * 10 ** rng.uniform(0.5, 4)
    cs = CsConfig.cpcs(t_cs)
    mine = check_interference_safety(links, cs, PARAMS)
    oracle = permuted_cpcs_violation(links, t_cs, PARAMS)
    assert (mine is None) == (oracle is None)
    if mine is not None:
        # the reported state is one of the smallest violating ones
        assert len(mine.sequence) == len(oracle)


def test_ordering_example_flagged_at_middle_link():
    links, _ = ordering_counterexample(1.0, 2.0)
    cex = check_interference_safety(links, CsConfig.cpcs(1.0), ChannelParams(1, 0, 2, 100))
    assert isinstance(cex, Counterexample)
    assert cex.link.id == "t2"
    assert len(cex.sequence) == 3
    assert cex.describe().endswith("state infeasible at t2")


def test_exhaustive_limit():
    with pytest.raises(TooLargeForExhaustive):
        check_interference_safety(small_topology(11, 0), CsConfig.cpcs(1.0), PARAMS)


def test_random_search_finds_ordering_example():
    links, _ = ordering_counterexample(1e-6, 4.0)
    p = ChannelParams(1, 0, 4, 100)
    cex = random_safety_search(links, CsConfig.cpcs(1e-6), p, samples=2000, seed=1)
    assert cex is not None and cex.link.id == "t2"
    cpcs, _ = certified_settings()
    assert random_safety_search(small_topology(30, 3, area=3000.0), cpcs, PARAMS, samples=500) is None


def test_instance_seeds_distinct():
    seeds = {instance_seed(7, k) for k in range(1000)}
    assert len(seeds) == 1000
    assert instance_seed(7, 3) == instance_seed(7, 3)


def test_single_cell_sweep(tmp_path):
    setup = SweepSetup(PARAMS, MacParams(), duration=0.01)
    res = benchmark_sweep([1.0], [1e-10], [0], setup)
    assert len(res.cells) == 1
    write_surface(tmp_path / "s.csv", res)
    write_curves(tmp_path / "c.csv", res)
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 2
    assert res.curves() == [(1.0, 1e-10, 1e-10)]


def test_sweep_deterministic_and_parallel_equal():
    setup = SweepSetup(PARAMS, MacParams(), duration=0.01)
    a = benchmark_sweep([0.5, 1.0], [1e-11, 1e-9], [0, 1], setup)
    b = benchmark_sweep([0.5, 1.0], [1e-11, 1e-9], [0, 1], setup, jobs=2)
    assert a.cells == b.cells


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError):
        benchmark_sweep([], [1e-10], [0], SweepSetup(PARAMS))
