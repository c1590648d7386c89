"""
Fitness-driven synthetic trading networks.

Every trader enters a seller or buyer pool with its order size as fitness.
Random seller/buyer pairs trade min(remaining) shares until one pool is
exhausted, so large orders collect many counterparties.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

import numpy as np

from lobnet.common.core.exceptions import SimulationError
from lobnet.common.models.records import DayStream, Trade
from lobnet.tradenet.network import TradingNetwork, executed_sizes, network_from_edges, submitted_sizes

logger = logging.getLogger(__name__)

POOL_EXECUTED = "executed"
POOL_SUBMITTED = "submitted"


@dataclass(frozen=True, slots=True)
class FitnessAgent:
    trader_id: str
    side: str  # "seller" | "buyer"
    remaining: int


def build_pools(
    day: Optional[DayStream],
    trades: Sequence[Trade],
    mode: str = POOL_EXECUTED,
) -> tuple[list[FitnessAgent], list[FitnessAgent]]:
    """
    Seller and buyer pools, sorted by trader id. `executed` seeds them with
    shares actually sold/bought (the pools balance exactly); `submitted` with
    total submitted shares per side.
    """
    if mode == POOL_EXECUTED:
        sizes = executed_sizes(trades)
    elif mode == POOL_SUBMITTED:
        if day is None:
            raise SimulationError("submitted pools need the day's order flow")
        sizes = submitted_sizes(day)
    else:
        raise SimulationError(f"unknown pool mode {mode!r}")

    sellers = [FitnessAgent(t, "seller", ask) for t, (ask, _) in sorted(sizes.items()) if ask > 0]
    buyers = [FitnessAgent(t, "buyer", bid) for t, (_, bid) in sorted(sizes.items()) if bid > 0]
    return sellers, buyers


def simulate_day(
    sellers: Sequence[FitnessAgent],
    buyers: Sequence[FitnessAgent],
    rng: np.random.Generator,
    day: Optional[date] = None,
) -> TradingNetwork:
    """
    Draw a seller and a buyer uniformly from the live pools, trade
    v = min(remaining), drop whoever reaches zero, and stop when a pool empties.
    """
    if not sellers or not buyers:
        raise SimulationError(f"empty pool: {len(sellers)} sellers, {len(buyers)} buyers")

    seller_ids = [a.trader_id for a in sellers]
    buyer_ids = [a.trader_id for a in buyers]
    seller_left = [a.remaining for a in sellers]
    buyer_left = [a.remaining for a in buyers]
    if min(seller_left) <= 0 or min(buyer_left) <= 0:
        raise SimulationError("every agent needs a positive fitness")

    edges: dict[tuple[str, str], int] = {}
    live_sellers, live_buyers = len(seller_ids), len(buyer_ids)
    while live_sellers and live_buyers:
        i = int(rng.integers(live_sellers))
        j = int(rng.integers(live_buyers))
        v = min(seller_left[i], buyer_left[j])
        key = (seller_ids[i], buyer_ids[j])
        edges[key] = edges.get(key, 0) + v
        seller_left[i] -= v
        buyer_left[j] -= v

        # swap-remove keeps the live agents in the first live_* slots
        if seller_left[i] == 0:
            live_sellers -= 1
            seller_ids[i], seller_ids[live_sellers] = seller_ids[live_sellers], seller_ids[i]
            seller_left[i], seller_left[live_sellers] = seller_left[live_sellers], seller_left[i]
        if buyer_left[j] == 0:
            live_buyers -= 1
            buyer_ids[j], buyer_ids[live_buyers] = buyer_ids[live_buyers], buyer_ids[j]
            buyer_left[j], buyer_left[live_buyers] = buyer_left[live_buyers], buyer_left[j]

    return network_from_edges(((s, b, w) for (s, b), w in edges.items()), day)
