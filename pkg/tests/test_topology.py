import io
import math

import numpy as np
import pytest
from scipy import stats

from sinrcs.carrier_sense import cpcs_sequence_admits, cpcs_simple_admits
from sinrcs.channel import ChannelParams, Link, infeasible_links
from sinrcs.topology import (
    TopologySpec,
    gen_clustered,
    gen_uniform,
    generate,
    links_for_density,
    load_topology,
    max_link_length,
    node_density,
    ordering_counterexample,
    save_topology,
    too_long_links,
    write_topology,
)
from sinrcs.verify import log_grid

from oracles import bisect


def test_empty_topology():
    assert gen_uniform(TopologySpec(n_links=0)) == []
    assert gen_clustered(TopologySpec("clustered", n_links=0)) == []


@pytest.mark.parametrize("kind", ["uniform", "clustered"])
def test_generated_links_respect_area_and_lengths(kind):
    spec = TopologySpec(kind, 300, (1000.0, 800.0), (20.0, 120.0), 4, 90.0, seed=3)
    links = generate(spec)
    assert len(links) == 300
    for link in links:
        for p in (link.tx, link.rx):
            assert 0 <= p.x <= 1000 and 0 <= p.y <= 800
        assert 20 - 1e-9 <= link.length <= 120 + 1e-9


@pytest.mark.parametrize("kind", ["uniform", "clustered"])
def test_seed_determinism(kind):
    a = generate(TopologySpec(kind, 50, seed=11))
    b = generate(TopologySpec(kind, 50, seed=11))
    c = generate(TopologySpec(kind, 50, seed=12))
    assert a == b and a != c


def test_single_tight_cluster():
    spec = TopologySpec("clustered", 40, (3000.0, 3000.0), (10.0, 20.0), clusters=1, spread=1e-9, seed=1)
    txs = np.array([(l.tx.x, l.tx.y) for l in gen_clustered(spec)])
    assert np.ptp(txs[:, 0]) < 1e-6 and np.ptp(txs[:, 1]) < 1e-6


def test_huge_spread_clusters_look_uniform():
    n = 2000
    area = (1000.0, 1000.0)
    spec = TopologySpec("clustered", n, area, (1.0, 2.0), clusters=n, spread=5000.0, seed=5)
    txs = np.array([(l.tx.x, l.tx.y) for l in gen_clustered(spec)])
    for axis in (0, 1):
        assert stats.kstest(txs[:, axis] / 1000.0, "uniform").pvalue > 0.01


def test_receiver_angles_isotropic():
    links = gen_uniform(TopologySpec(n_links=2000, seed=9))
    ang = np.array([math.atan2(l.rx.y - l.tx.y, l.rx.x - l.tx.x) for l in links])
    assert stats.kstest((ang + math.pi) / (2 * math.pi), "uniform").pvalue > 0.01


def test_spec_validation():
    with pytest.raises(ValueError):
        TopologySpec("grid")
    with pytest.raises(ValueError):
        TopologySpec(link_len=(5.0, 1.0))
    with pytest.raises(ValueError):
        gen_clustered(TopologySpec("clustered", 3, clusters=0))


def test_density_examples():
    assert node_density([], 100.0, 1e6) == 0
    area = 1e6
    d_max = math.sqrt(area / 100 / math.pi)
    links = [Link(k, (k, 0.0), (k, 1.0)) for k in range(100)]
    assert node_density(links, d_max, area) == pytest.approx(1.0)
    assert links_for_density(1.0, d_max, area) == 100
    assert links_for_density(2.0, 250.0, (3000.0, 3000.0)) == round(2 * 9e6 / (math.pi * 250**2))


def test_round_trip_exact(tmp_path):
    links = gen_uniform(TopologySpec(n_links=25, seed=4))
    path = tmp_path / "t.csv"
    save_topology(links, path)
    assert load_topology(path) == links
    buf = io.StringIO()
    write_topology(buf, links)
    assert buf.getvalue() == path.read_text()
    assert buf.getvalue().splitlines()[0] == "link_id,tx_x,tx_y,rx_x,rx_y"


def test_string_ids_survive_round_trip(tmp_path):
    links, _ = ordering_counterexample(0.3, 3.0)
    save_topology(links, tmp_path / "c.csv")
    assert load_topology(tmp_path / "c.csv") == links


def test_too_long_links_reported():
    p = ChannelParams(0.1, 1e-13, 4, 100)
    limit = (p.power_p / (p.beta_sinr * p.noise_n)) ** 0.25
    links = [Link(0, (0, 0), (limit * 0.9, 0)), Link(1, (0, 10), (limit * 1.1, 10))]
    assert [l.id for l in too_long_links(links, p)] == [1]
    assert max_link_length(links) == pytest.approx(limit * 1.1)
    generated = gen_uniform(TopologySpec(n_links=200, seed=2))
    assert too_long_links(generated, p) == []


def test_counterexample_unit_threshold_geometry():
    links, order = ordering_counterexample(1.0, 4.0)
    h = links[1].tx.x - links[0].tx.x
    l = links[2].tx.x - links[1].tx.x
    root = bisect(lambda u: u**-4 + (1 + u) ** -4 - 1, 0.5, 2.0)
    assert h == pytest.approx(1.0, rel=1e-12)
    assert l == pytest.approx(root, rel=1e-10)
    assert [x.id for x in order] == ["t1", "t2", "t3"]


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0])
def test_counterexample_over_six_decades(alpha):
    for t_cs in log_grid(1e-9, 1e-3, 13):
        links, order = ordering_counterexample(t_cs, alpha, power_p=0.1)
        p = ChannelParams(0.1, 0.0, alpha, 100)
        assert cpcs_sequence_admits(order, t_cs, p)
        assert not cpcs_simple_admits(links, t_cs, p)
        assert [l.id for l in infeasible_links(links, p)] == ["t2"]
        assert infeasible_links(links[:2], p) == [] and infeasible_links(links[1:], p) == []


def test_counterexample_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        ordering_counterexample(0.0, 4.0)
