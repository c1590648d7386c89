"""
Brute-force reference matcher.

Keeps resting orders in a plain list and re-scans it for every decision, so
each step is O(n). It shares no code with the engine beyond the session
calendar and is used to cross-check ledgers on small days.
"""
from __future__ import annotations

import logging

from lobnet.common.models.records import (
    Action,
    Aggressor,
    DayStream,
    OrderEvent,
    SessionPhase,
    Trade,
)
from lobnet.common.models.schemas import CancelMode
from lobnet.orderflow.phases import (
    AFTERNOON_START,
    AUCTION_TIME,
    CONTINUOUS_START,
    FROZEN_CANCEL_START,
    LUNCH_START,
    MARKET_CLOSE,
    OPEN_AUCTION_START,
)

logger = logging.getLogger(__name__)


class _Order:
    __slots__ = ("order_id", "trader_id", "is_bid", "price", "remaining", "timestamp")

    def __init__(self, event: OrderEvent):
        self.order_id = event.order_id
        self.trader_id = event.trader_id
        self.is_bid = event.action is Action.SUBMIT_BID
        self.price = event.price
        self.remaining = event.size
        self.timestamp = event.timestamp


class ReferenceMatcher:
    def __init__(self, cancel_mode: CancelMode = CancelMode.TARGET):
        self.cancel_mode = cancel_mode

    def run_day(self, day: DayStream) -> list[Trade]:
        self.resting: list[_Order] = []
        self.trades: list[Trade] = []
        self.prev_close = day.prev_close
        buffered: list[OrderEvent] = []
        lunch: list[OrderEvent] = []
        auction_done = cool_flushed = lunch_flushed = closed = False

        for event in list(day.events) + [None]:
            ts = MARKET_CLOSE + 1 if event is None else event.timestamp

            if not auction_done and ts >= AUCTION_TIME:
                auction_done = True
                self._auction()
                for cancel in buffered:
                    self._cancel(cancel)
                buffered = []
            if not cool_flushed and ts >= CONTINUOUS_START:
                cool_flushed = True
                for cancel in buffered:
                    self._cancel(cancel)
                buffered = []
            if not lunch_flushed and ts >= AFTERNOON_START:
                lunch_flushed = True
                for queued in lunch:
                    if queued.action is Action.CANCEL:
                        self._cancel(queued)
                    else:
                        self._continuous(queued, AFTERNOON_START, SessionPhase.AFTERNOON_CONTINUOUS)
                lunch = []
            if not closed and ts >= MARKET_CLOSE:
                closed = True
                self.resting = []
            if event is None:
                break

            if event.action is Action.CANCEL:
                if OPEN_AUCTION_START <= ts < FROZEN_CANCEL_START:
                    self._cancel(event)
                elif FROZEN_CANCEL_START <= ts < CONTINUOUS_START:
                    buffered.append(event)
                elif LUNCH_START <= ts < AFTERNOON_START:
                    lunch.append(event)
                else:
                    self._cancel(event)
            elif OPEN_AUCTION_START <= ts < AUCTION_TIME:
                self.resting.append(_Order(event))
            elif LUNCH_START <= ts < AFTERNOON_START:
                lunch.append(event)
            elif AUCTION_TIME <= ts < CONTINUOUS_START:
                self._continuous(event, ts, SessionPhase.COOL_PERIOD)
            elif CONTINUOUS_START <= ts < LUNCH_START:
                self._continuous(event, ts, SessionPhase.MORNING_CONTINUOUS)
            elif AFTERNOON_START <= ts < MARKET_CLOSE:
                self._continuous(event, ts, SessionPhase.AFTERNOON_CONTINUOUS)
            else:
                logger.warning(f"Reference matcher ignores order {event.order_id} outside trading hours")

        return self.trades

    def _record(self, ts, seller, buyer, price, size, phase, aggressor, bid_id, ask_id) -> None:
        self.trades.append(Trade(
            trade_id=len(self.trades) + 1,
            timestamp=ts,
            seller_id=seller,
            buyer_id=buyer,
            price=price,
            size=size,
            phase=phase,
            aggressor=aggressor,
            bid_order_id=bid_id,
            ask_order_id=ask_id,
        ))

    def _best(self, bids: bool, limit: int | None = None) -> _Order | None:
        best = None
        for order in self.resting:
            if order.is_bid != bids:
                continue
            if limit is not None and (order.price < limit if bids else order.price > limit):
                continue
            if best is None:
                best = order
                continue
            better_price = order.price > best.price if bids else order.price < best.price
            same_price_earlier = order.price == best.price and \
                (order.timestamp, order.order_id) < (best.timestamp, best.order_id)
            if better_price or same_price_earlier:
                best = order
        return best

    def _drop_filled(self) -> None:
        self.resting = [o for o in self.resting if o.remaining > 0]

    def _continuous(self, event: OrderEvent, ts: int, phase: SessionPhase) -> None:
        incoming = _Order(event)
        while incoming.remaining > 0:
            head = self._best(not incoming.is_bid, limit=incoming.price)
            if head is None:
                break
            size = min(incoming.remaining, head.remaining)
            if incoming.is_bid:
                self._record(ts, head.trader_id, incoming.trader_id, head.price, size, phase,
                             Aggressor.BUY, incoming.order_id, head.order_id)
            else:
                self._record(ts, incoming.trader_id, head.trader_id, head.price, size, phase,
                             Aggressor.SELL, head.order_id, incoming.order_id)
            incoming.remaining -= size
            head.remaining -= size
            self._drop_filled()
        if incoming.remaining > 0:
            self.resting.append(incoming)

    def _auction(self) -> None:
        bids = [o for o in self.resting if o.is_bid]
        asks = [o for o in self.resting if not o.is_bid]
        if not bids or not asks:
            return
        low = min(o.price for o in asks)
        high = max(o.price for o in bids)
        best_key, best_price = None, None
        for price in range(low, high + 1):
            demand = sum(o.remaining for o in bids if o.price >= price)
            supply = sum(o.remaining for o in asks if o.price <= price)
            volume = min(demand, supply)
            key = (-volume, abs(demand - supply), abs(price - self.prev_close), price)
            if volume > 0 and (best_key is None or key < best_key):
                best_key, best_price = key, price
        if best_price is None:
            return

        while True:
            bid = self._best(True, limit=best_price)
            ask = self._best(False, limit=best_price)
            if bid is None or ask is None:
                break
            size = min(bid.remaining, ask.remaining)
            self._record(AUCTION_TIME, ask.trader_id, bid.trader_id, best_price, size,
                         SessionPhase.OPEN_CALL_AUCTION, Aggressor.AUCTION, bid.order_id, ask.order_id)
            bid.remaining -= size
            ask.remaining -= size
            self._drop_filled()

    def _cancel(self, cancel: OrderEvent) -> None:
        if cancel.cancel_target is None:
            if self.cancel_mode is not CancelMode.OLDEST_OPEN:
                return
            mine = [o for o in self.resting if o.trader_id == cancel.trader_id]
            if mine:
                self.resting.remove(mine[0])
            return
        self.resting = [o for o in self.resting if o.order_id != cancel.cancel_target]
