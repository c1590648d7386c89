"""
Trading network tests.

This module tests:
- Network construction from a trade ledger, self-loops included
- Degrees, size metrics and connected components
- Neighbor-degree profiles on networks with known structure
- Size-degree scaling and per-day degree fits
"""
import numpy as np
import pytest

from lobnet.common.core.exceptions import StatsError
from lobnet.common.models.records import DegreeRecord, Trade, Aggressor, SessionPhase
from lobnet.matchengine import run_day
from lobnet.tradenet import (
    Direction,
    TradingNetwork,
    build_network,
    components,
    degree_distribution_fits,
    degree_size_correlation,
    degrees,
    knn_profile,
    network_metrics,
    order_sizes,
)
from lobnet.tradenet.network import network_from_edges
from lobnet.tradenet.profiles import degree_samples
from tests.test_utils import TEST_DATE


def trade(seller: str, buyer: str, size: int, trade_id: int = 1) -> Trade:
    return Trade(trade_id, 0, seller, buyer, 1000, size, SessionPhase.MORNING_CONTINUOUS, Aggressor.BUY)


# ============================================
# Construction Tests
# ============================================

@pytest.mark.unit
def test_star_network(star_day):
    """Test the star around the single buyer and its size metrics"""
    net = build_network(run_day(star_day).trades, TEST_DATE)

    assert net.edges() == [("h", "x", 200), ("i", "x", 100), ("j", "x", 200)]
    metrics = network_metrics(net)
    assert (metrics.N, metrics.N_ask, metrics.N_bid, metrics.N_e) == (4, 3, 1, 3)
    assert metrics.mean_k_ask == pytest.approx(1.0)
    assert metrics.mean_k_bid == pytest.approx(3.0)
    assert metrics.mean_k == pytest.approx(1.5)
    assert (metrics.r_LC, metrics.r_2LC) == (1.0, 0.0)
    assert metrics.total_weight == 500


@pytest.mark.unit
def test_repeated_pairs_accumulate_weight():
    """Test that trades between the same pair add up on one directed edge"""
    net = build_network([trade("a", "b", 100), trade("a", "b", 50), trade("b", "a", 10)])

    assert net.weight("a", "b") == 150
    assert net.weight("b", "a") == 10
    assert net.N_e == 2
    assert net.k_ask("a") == 1 and net.k_bid("a") == 1


@pytest.mark.unit
def test_self_trades_keep_volume_but_not_degree():
    """Test that a self-loop counts in the weights and nowhere in the degrees"""
    net = build_network([trade("a", "a", 100), trade("a", "b", 30)])

    assert net.total_weight() == 130
    assert net.self_loop_weight() == 100
    assert net.N_e == 1
    assert net.edges() == [("a", "b", 30)]
    assert net.edges(include_self_loops=True) == [("a", "a", 100), ("a", "b", 30)]
    assert net.k_ask("a") == 1
    assert net.k_bid("a") == 0


@pytest.mark.unit
def test_degree_sums_equal_edge_count(synthetic_days):
    """Test that ask-degrees and bid-degrees both sum to N_e"""
    for day in synthetic_days:
        net = build_network(run_day(day).trades, day.date)
        records = degrees(net)
        assert sum(r.k_ask for r in records) == net.N_e
        assert sum(r.k_bid for r in records) == net.N_e
        assert [r.trader_id for r in records] == sorted(r.trader_id for r in records)


@pytest.mark.unit
def test_order_size_bases(star_day):
    """Test submitted and executed order sizes per trader and side"""
    trades = run_day(star_day).trades

    submitted = order_sizes(star_day, trades, "submitted")
    executed = order_sizes(star_day, trades, "executed")
    assert submitted["j"] == (300, 0)
    assert executed["j"] == (200, 0)
    assert executed["x"] == (0, 500)
    assert "l" in submitted and "l" not in executed

    with pytest.raises(StatsError):
        order_sizes(None, trades, "submitted")
    with pytest.raises(StatsError):
        order_sizes(star_day, trades, "notional")


# ============================================
# Component Tests
# ============================================

@pytest.mark.unit
def test_components_largest_first(networks):
    """Test the relative sizes of the two largest weak components"""
    net = networks.complete_blocks([(2, 3), (1, 1), (1, 2)])
    report = components(net)

    assert report.sizes == [5, 3, 2]
    assert report.r_LC == pytest.approx(0.5)
    assert report.r_2LC == pytest.approx(0.3)
    assert report.labels["s0_0"] == 0
    assert report.labels["b1_0"] == 2


@pytest.mark.unit
def test_components_of_empty_network():
    """Test that an empty network has no components and zero metrics"""
    with pytest.raises(StatsError):
        components(TradingNetwork())
    metrics = network_metrics(TradingNetwork(TEST_DATE))
    assert (metrics.N, metrics.N_e, metrics.mean_k) == (0, 0, 0.0)


# ============================================
# Neighbor Degree Tests
# ============================================

@pytest.mark.unit
def test_knn_decreases_on_disassortative_blocks(networks):
    """Test that sellers with many buyers trade with buyers that have few sellers"""
    shapes = [(64, 1), (32, 2), (16, 4), (8, 8), (4, 16), (2, 32), (1, 64)]
    profile = knn_profile([networks.complete_blocks(shapes)], Direction.ASK_SIDE, bins=7)

    assert [b.mean_k for b in profile] == [1, 2, 4, 8, 16, 32, 64]
    assert [b.mean_knn for b in profile] == [64, 32, 16, 8, 4, 2, 1]
    assert [b.count for b in profile] == [64, 32, 16, 8, 4, 2, 1]


@pytest.mark.unit
def test_knn_flat_on_regular_network(networks):
    """Test that a k-regular bipartite network gives k_nn = k on both sides"""
    net = networks.regular_bipartite(3, 12)
    for direction in Direction:
        (only,) = knn_profile([net, net], direction)
        assert only.mean_k == 3
        assert only.mean_knn == 3
        assert only.count == 24


@pytest.mark.unit
def test_knn_needs_networks():
    """Test that a profile over no networks is refused and isolated sides give no bins"""
    with pytest.raises(StatsError):
        knn_profile([], Direction.ASK_SIDE)
    only_self = network_from_edges([("a", "a", 10)])
    assert knn_profile([only_self], Direction.BID_SIDE) == []


# ============================================
# Size-Degree Tests
# ============================================

@pytest.mark.unit
def test_size_degree_slope():
    """Test that k = s^0.8 gives beta close to 0.8"""
    sizes = np.unique(np.logspace(2, 6, 400).astype(int))
    records = [DegreeRecord(f"t{i}", int(round(s ** 0.8)), 0, s_ask=int(s)) for i, s in enumerate(sizes)]
    profile = degree_size_correlation(records, "ask", bins=12, fit_threshold=0)

    assert profile.beta == pytest.approx(0.8, abs=0.02)
    assert profile.fit_points == len(profile.bins)
    assert sum(b.count for b in profile.bins) == len(sizes)


@pytest.mark.unit
def test_size_degree_threshold_and_side():
    """Test that bins below the threshold are left out of the slope and bad sides refused"""
    records = [DegreeRecord(f"t{i}", 1, 2, s_ask=0, s_bid=100 * (i + 1)) for i in range(5)]

    profile = degree_size_correlation(records, "bid", bins=5, fit_threshold=10_000)
    assert profile.beta is None
    assert profile.fit_points == 0
    assert len(profile.bins) > 0

    assert degree_size_correlation(records, "ask").bins == []
    with pytest.raises(StatsError):
        degree_size_correlation(records, "both")


# ============================================
# Degree Fit Tests
# ============================================

@pytest.mark.unit
def test_degree_samples_skip_zero_degrees(star_day):
    """Test that only positive degrees enter the samples"""
    net = build_network(run_day(star_day).trades)
    samples = degree_samples(net)
    assert samples == {"ask": [1, 1, 1], "bid": [3], "total": [1, 1, 1, 3]}


@pytest.mark.unit
def test_small_networks_flag_their_fits(networks, fast_fit_config):
    """Test that a network too small to fit is flagged instead of failing the batch"""
    per_day, summary = degree_distribution_fits([networks.regular_bipartite(2, 5)], fast_fit_config)

    assert per_day[0].flagged
    assert per_day[0].fits["ask"] is None
    assert set(per_day[0].errors) == {"ask", "bid", "total"}
    assert summary["ask"]["failed"] == 1


# ============================================
# Invariance And Oracle Tests
# ============================================

def random_trades(rng: np.random.Generator, traders: int, count: int) -> list[Trade]:
    pairs = rng.integers(traders, size=(count, 2))
    sizes = rng.integers(1, 10, size=count) * 100
    return [trade(f"t{a:03d}", f"t{b:03d}", int(v), i + 1) for i, ((a, b), v) in enumerate(zip(pairs, sizes))]


def flood_fill_parts(trades: list[Trade]) -> list[set[str]]:
    neighbors: dict[str, set[str]] = {}
    for t in trades:
        neighbors.setdefault(t.seller_id, set()).add(t.buyer_id)
        neighbors.setdefault(t.buyer_id, set()).add(t.seller_id)
    seen: set[str] = set()
    parts = []
    for start in sorted(neighbors):
        if start in seen:
            continue
        part, frontier = {start}, [start]
        while frontier:
            for other in neighbors[frontier.pop()]:
                if other not in part:
                    part.add(other)
                    frontier.append(other)
        seen |= part
        parts.append(part)
    return parts


@pytest.mark.unit
def test_components_agree_with_flood_fill():
    """Test component sizes and membership against a plain traversal of the undirected graph"""
    for seed in range(20):
        rng = np.random.default_rng(seed)
        trades = random_trades(rng, traders=300, count=150 + 10 * seed)
        report = components(build_network(trades))
        parts = flood_fill_parts(trades)

        assert report.sizes == sorted((len(p) for p in parts), reverse=True)
        for part in parts:
            assert len({report.labels[t] for t in part}) == 1
        assert len({report.labels[next(iter(p))] for p in parts}) == len(parts)


@pytest.mark.unit
def test_network_ignores_trade_order():
    """Test that shuffling the ledger leaves edges, weights and degrees unchanged"""
    rng = np.random.default_rng(11)
    trades = random_trades(rng, traders=60, count=400)
    shuffled = [trades[i] for i in rng.permutation(len(trades))]

    net, other = build_network(trades), build_network(shuffled)
    assert net.edges(include_self_loops=True) == other.edges(include_self_loops=True)
    assert (net.sellers, net.buyers) == (other.sellers, other.buyers)
    assert degrees(net) == degrees(other)
    assert network_metrics(net) == network_metrics(other)


@pytest.mark.unit
def test_size_degree_slope_through_default_bins():
    """Test that k = round(s^0.8) over log-uniform sizes gives beta = 0.80 with the default 24 bins"""
    rng = np.random.default_rng(5)
    sizes = np.exp(rng.uniform(np.log(1e3), np.log(1e6), size=3000)).astype(int)
    records = [DegreeRecord(f"t{i}", int(round(s ** 0.8)), 0, s_ask=int(s)) for i, s in enumerate(sizes)]
    profile = degree_size_correlation(records, "ask")

    assert len(profile.bins) <= 24
    assert profile.fit_threshold == 3000
    assert profile.beta == pytest.approx(0.80, abs=0.03)
