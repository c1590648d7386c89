"""
Daily trading network: traders are nodes, and every trade adds its size to
the directed edge seller -> buyer.

Self-trades stay in the graph as self-loops so volume totals are conserved,
but they are not counterparty relations: degrees, N_e and neighbor averages
skip them.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Mapping, Optional

import networkx as nx

from lobnet.common.core.config import settings
from lobnet.common.core.exceptions import StatsError
from lobnet.common.models.records import Action, DayStream, DegreeRecord, Trade
from lobnet.common.models.schemas import NetworkSizeMetrics

logger = logging.getLogger(__name__)


class TradingNetwork:
    """Directed weighted graph of one day's trades (networkx DiGraph underneath)."""

    def __init__(self, day: Optional[date] = None):
        self.date = day
        self.graph = nx.DiGraph()
        self.sellers: set[str] = set()
        self.buyers: set[str] = set()

    def add_trade(self, seller: str, buyer: str, size: int) -> None:
        if self.graph.has_edge(seller, buyer):
            self.graph[seller][buyer]["weight"] += size
        else:
            self.graph.add_edge(seller, buyer, weight=size)
        self.sellers.add(seller)
        self.buyers.add(buyer)

    @property
    def N(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def N_e(self) -> int:
        return self.graph.number_of_edges() - nx.number_of_selfloops(self.graph)

    def nodes(self) -> list[str]:
        return sorted(self.graph.nodes)

    def weight(self, seller: str, buyer: str) -> int:
        data = self.graph.get_edge_data(seller, buyer)
        return data["weight"] if data else 0

    def edges(self, include_self_loops: bool = False) -> list[tuple[str, str, int]]:
        """(seller, buyer, weight), sorted."""
        return sorted(
            (u, v, w)
            for u, v, w in self.graph.edges(data="weight")
            if include_self_loops or u != v
        )

    def total_weight(self) -> int:
        return sum(w for _, _, w in self.graph.edges(data="weight"))

    def self_loop_weight(self) -> int:
        return sum(self.graph[u][u]["weight"] for u in nx.nodes_with_selfloops(self.graph))

    def buyers_of(self, seller: str) -> list[str]:
        return [b for b in self.graph.successors(seller) if b != seller]

    def sellers_of(self, buyer: str) -> list[str]:
        return [s for s in self.graph.predecessors(buyer) if s != buyer]

    def k_ask(self, trader: str) -> int:
        return len(self.buyers_of(trader))

    def k_bid(self, trader: str) -> int:
        return len(self.sellers_of(trader))


def build_network(trades: Iterable[Trade], day: Optional[date] = None) -> TradingNetwork:
    net = TradingNetwork(day)
    for trade in trades:
        net.add_trade(trade.seller_id, trade.buyer_id, trade.size)
    return net


def network_from_edges(edges: Iterable[tuple[str, str, int]], day: Optional[date] = None) -> TradingNetwork:
    net = TradingNetwork(day)
    for seller, buyer, weight in edges:
        net.add_trade(seller, buyer, weight)
    return net


def submitted_sizes(day: DayStream) -> dict[str, tuple[int, int]]:
    """trader -> (total ask shares submitted, total bid shares submitted)."""
    sizes: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for event in day.events:
        if event.action is Action.SUBMIT_ASK:
            sizes[event.trader_id][0] += event.size
        elif event.action is Action.SUBMIT_BID:
            sizes[event.trader_id][1] += event.size
    return {trader: (ask, bid) for trader, (ask, bid) in sizes.items()}


def executed_sizes(trades: Iterable[Trade]) -> dict[str, tuple[int, int]]:
    """trader -> (shares sold, shares bought)."""
    sizes: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for trade in trades:
        sizes[trade.seller_id][0] += trade.size
        sizes[trade.buyer_id][1] += trade.size
    return {trader: (sold, bought) for trader, (sold, bought) in sizes.items()}


def order_sizes(day: Optional[DayStream], trades: Iterable[Trade], basis: str | None = None) -> dict[str, tuple[int, int]]:
    """Per-trader order size s for each side on the configured basis (submitted or executed)."""
    basis = basis or settings.order_size_basis
    if basis == "submitted":
        if day is None:
            raise StatsError("submitted order sizes need the day's order flow")
        return submitted_sizes(day)
    if basis == "executed":
        return executed_sizes(trades)
    raise StatsError(f"unknown order size basis {basis!r}")


def degrees(net: TradingNetwork, sizes: Mapping[str, tuple[int, int]] | None = None) -> list[DegreeRecord]:
    """One record per node, sorted by trader id; sum(k_ask) == sum(k_bid) == N_e."""
    sizes = sizes or {}
    records = []
    for trader in net.nodes():
        s_ask, s_bid = sizes.get(trader, (0, 0))
        records.append(DegreeRecord(
            trader_id=trader,
            k_ask=net.k_ask(trader),
            k_bid=net.k_bid(trader),
            s_ask=s_ask,
            s_bid=s_bid,
        ))
    return records


@dataclass
class ComponentReport:
    r_LC: float
    r_2LC: float
    sizes: list[int]
    labels: dict[str, int] = field(default_factory=dict)  # trader -> component rank, 0 = largest


def components(net: TradingNetwork) -> ComponentReport:
    """Weakly connected components, largest first (ties by smallest member id)."""
    if net.N == 0:
        raise StatsError("components of an empty network are undefined")
    parts = sorted(
        (sorted(c) for c in nx.weakly_connected_components(net.graph)),
        key=lambda members: (-len(members), members[0]),
    )
    labels = {trader: rank for rank, members in enumerate(parts) for trader in members}
    sizes = [len(members) for members in parts]
    return ComponentReport(
        r_LC=sizes[0] / net.N,
        r_2LC=sizes[1] / net.N if len(sizes) > 1 else 0.0,
        sizes=sizes,
        labels=labels,
    )


def _mean_positive(values: Iterable[int]) -> Optional[float]:
    positive = [v for v in values if v > 0]
    return sum(positive) / len(positive) if positive else None


def network_metrics(net: TradingNetwork, sizes: Mapping[str, tuple[int, int]] | None = None) -> NetworkSizeMetrics:
    """
    Size metrics. <k> = 2 N_e / N; <k_ask> and <k_bid> average over the
    day's sellers and buyers respectively.
    """
    n, n_e = net.N, net.N_e
    report = components(net) if n else None
    sizes = sizes or {}
    return NetworkSizeMetrics(
        date=net.date,
        N=n,
        N_ask=len(net.sellers),
        N_bid=len(net.buyers),
        N_e=n_e,
        r_LC=report.r_LC if report else 0.0,
        r_2LC=report.r_2LC if report else 0.0,
        mean_k_ask=n_e / len(net.sellers) if net.sellers else 0.0,
        mean_k_bid=n_e / len(net.buyers) if net.buyers else 0.0,
        mean_k=2.0 * n_e / n if n else 0.0,
        total_weight=net.total_weight(),
        self_loop_weight=net.self_loop_weight(),
        mean_s_ask=_mean_positive(sizes[t][0] for t in net.sellers if t in sizes),
        mean_s_bid=_mean_positive(sizes[t][1] for t in net.buyers if t in sizes),
    )
