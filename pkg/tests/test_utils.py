"""
Test utilities and builders shared by the lobnet test modules.
"""
from datetime import date
from typing import Iterable, Optional, Sequence

from lobnet.common.models.records import Action, DayStream, OrderEvent, Trade
from lobnet.common.models.schemas import GenConfig
from lobnet.orderflow.phases import hms
from lobnet.synthgen import generate_day
from lobnet.tradenet.network import TradingNetwork, network_from_edges

TEST_DATE = date(2003, 1, 3)
PREV_CLOSE = 1000  # 10.00


class TestHelper:
    """Builders for events, days and small networks"""

    @staticmethod
    def bid(order_id: int, trader: str, price: int, size: int, at: int) -> OrderEvent:
        return OrderEvent(order_id, at, trader, Action.SUBMIT_BID, price, size)

    @staticmethod
    def ask(order_id: int, trader: str, price: int, size: int, at: int) -> OrderEvent:
        return OrderEvent(order_id, at, trader, Action.SUBMIT_ASK, price, size)

    @staticmethod
    def cancel(order_id: int, trader: str, target: Optional[int], at: int) -> OrderEvent:
        return OrderEvent(order_id, at, trader, Action.CANCEL, 0, 0, cancel_target=target)

    @staticmethod
    def day(events: Iterable[OrderEvent], prev_close: int = PREV_CLOSE, on: date = TEST_DATE) -> DayStream:
        return DayStream(
            date=on,
            events=tuple(sorted(events, key=lambda e: e.sort_key)),
            prev_close=prev_close,
            limit_fraction=0.10,
        )

    @staticmethod
    def star_day() -> DayStream:
        """
        Five asks at 10.00 from h, i, j, l, m (200, 100, 300, 100, 200) in
        arrival order, then a 500-share bid from x at 10.00.
        """
        t0 = hms(10, 0)
        asks = [
            TestHelper.ask(k + 1, trader, 1000, size, t0 + k)
            for k, (trader, size) in enumerate([("h", 200), ("i", 100), ("j", 300), ("l", 100), ("m", 200)])
        ]
        return TestHelper.day(asks + [TestHelper.bid(6, "x", 1000, 500, t0 + 10)])

    @staticmethod
    def synthetic_day(seed: int, events: int = 200, traders: int = 20, **overrides) -> DayStream:
        """A small synthetic day that touches every trading phase."""
        config = GenConfig(
            date=TEST_DATE,
            traders=traders,
            events=events,
            prev_close=PREV_CLOSE,
            max_lots=20,
            max_offset_ticks=5,
            rng_seed=seed,
            **overrides,
        )
        return generate_day(config)

    @staticmethod
    def trade_tuples(trades: Sequence[Trade]) -> list[tuple]:
        return [(t.seller_id, t.buyer_id, t.price, t.size) for t in trades]


class NetworkHelper:
    """Fixture networks with known degree structure"""

    @staticmethod
    def complete_blocks(block_shapes: Sequence[tuple[int, int]], on: date = TEST_DATE) -> TradingNetwork:
        """
        Disjoint complete bipartite blocks of a sellers x b buyers. Sellers of a
        block have k_ask = b and k_nn = a; (1, b) is a star around one seller,
        (a, 1) a star around one buyer.
        """
        edges = [
            (f"s{n}_{i}", f"b{n}_{j}", 100)
            for n, (a, b) in enumerate(block_shapes)
            for i in range(a)
            for j in range(b)
        ]
        return network_from_edges(edges, on)

    @staticmethod
    def regular_bipartite(k: int, n: int, on: date = TEST_DATE) -> TradingNetwork:
        """n sellers and n buyers; seller i sells to buyers i, i+1, ..., i+k-1 (mod n)."""
        edges = [(f"s{i}", f"b{(i + j) % n}", 100) for i in range(n) for j in range(k)]
        return network_from_edges(edges, on)
