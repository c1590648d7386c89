"""
Central limit order book with price-time priority.

Both sides are sortedcontainers.SortedList instances keyed so that index 0 is
always the queue head: asks by (price, arrival), bids by (-price, arrival).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from sortedcontainers import SortedList

from lobnet.common.models.records import OrderEvent, RestingOrder, Side


def _ask_key(order: RestingOrder) -> tuple[int, int, int]:
    return (order.price, order.timestamp, order.order_id)


def _bid_key(order: RestingOrder) -> tuple[int, int, int]:
    return (-order.price, order.timestamp, order.order_id)


@dataclass(frozen=True, slots=True)
class LevelSnapshot:
    side: Side
    price: int
    queue: tuple[tuple[int, int], ...]  # (order_id, remaining) in priority order

    @property
    def depth(self) -> int:
        return sum(remaining for _, remaining in self.queue)


class OrderBook:
    """
    Two priority queues of resting orders plus the frozen-cancel buffer.

    Attributes:
        asks: resting asks, best (lowest) price first
        bids: resting bids, best (highest) price first
        orders: order_id -> resting order, in arrival order
        frozen_cancels: cancels waiting for the next batch (9:25 or 9:30)
    """

    def __init__(self):
        self.asks: SortedList = SortedList(key=_ask_key)
        self.bids: SortedList = SortedList(key=_bid_key)
        self.orders: dict[int, RestingOrder] = {}
        self.frozen_cancels: list[OrderEvent] = []

    def __len__(self) -> int:
        return len(self.orders)

    def __contains__(self, order_id: int) -> bool:
        return order_id in self.orders

    def side(self, side: Side) -> SortedList:
        return self.bids if side is Side.BID else self.asks

    def opposite(self, side: Side) -> SortedList:
        return self.asks if side is Side.BID else self.bids

    def add(self, order: RestingOrder) -> None:
        if order.remaining <= 0:
            raise ValueError(f"order {order.order_id} has nothing left to rest")
        self.side(order.side).add(order)
        self.orders[order.order_id] = order

    def remove(self, order: RestingOrder) -> None:
        self.side(order.side).remove(order)
        del self.orders[order.order_id]

    def best_bid(self) -> Optional[int]:
        return self.bids[0].price if self.bids else None

    def best_ask(self) -> Optional[int]:
        return self.asks[0].price if self.asks else None

    def is_crossed(self) -> bool:
        bid, ask = self.best_bid(), self.best_ask()
        return bid is not None and ask is not None and bid >= ask

    def oldest_open(self, trader_id: str) -> Optional[RestingOrder]:
        """The trader's earliest-arrived resting order."""
        for order in self.orders.values():
            if order.trader_id == trader_id:
                return order
        return None

    def levels(self, side: Side) -> Iterator[LevelSnapshot]:
        """Price levels of one side in priority order."""
        price: Optional[int] = None
        queue: list[tuple[int, int]] = []
        for order in self.side(side):
            if order.price != price:
                if queue:
                    yield LevelSnapshot(side, price, tuple(queue))
                price, queue = order.price, []
            queue.append((order.order_id, order.remaining))
        if queue:
            yield LevelSnapshot(side, price, tuple(queue))

    def snapshot(self) -> tuple[LevelSnapshot, ...]:
        return tuple(self.levels(Side.BID)) + tuple(self.levels(Side.ASK))

    def total_shares(self, side: Side) -> int:
        return sum(order.remaining for order in self.side(side))

    def clear(self) -> list[RestingOrder]:
        """Drop every resting order; returns them in arrival order."""
        expired = list(self.orders.values())
        self.asks.clear()
        self.bids.clear()
        self.orders.clear()
        return expired
