"""
Day replay under the 2003 Shenzhen session rules.

The session is driven by the event clock. Before an event is dispatched every
scheduled milestone at or before its timestamp fires, in time order:

    09:25  opening call auction, then the buffered 9:20-9:25 cancels
    09:30  cancels buffered during the cool period
    13:00  events queued over the lunch break, continuous semantics
    15:00  every resting order expires
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Iterable, Iterator, Optional, Union

from opentelemetry import trace

from lobnet.common.core.exceptions import EngineError
from lobnet.common.models.records import (
    Aggressor,
    AuctionResult,
    DayStream,
    OrderEvent,
    RestingOrder,
    SessionPhase,
    Side,
    Trade,
    TransactionRatios,
)
from lobnet.common.models.schemas import CancelMode
from lobnet.matchengine.auction import call_auction_price, execute_call_auction
from lobnet.matchengine.book import LevelSnapshot, OrderBook
from lobnet.orderflow.phases import (
    AFTERNOON_START,
    AUCTION_TIME,
    CENTISECONDS_PER_DAY,
    CONTINUOUS_START,
    FROZEN_CANCEL_START,
    MARKET_CLOSE,
    classify_phase,
    format_timestamp,
)
from lobnet.tradestats.ratios import transaction_ratios

logger = logging.getLogger(__name__)

NOOP_FILLED = "filled"
NOOP_UNKNOWN = "unknown"
NOOP_NO_OPEN_ORDER = "no open order"


@dataclass(frozen=True, slots=True)
class Canceled:
    order_id: int
    shares: int


@dataclass(frozen=True, slots=True)
class NoOp:
    reason: str


CancelOutcome = Union[Canceled, NoOp]


def match_continuous(
    book: OrderBook,
    incoming: OrderEvent,
    trade_ids: Iterator[int] | None = None,
    phase: SessionPhase | None = None,
    timestamp: int | None = None,
) -> list[Trade]:
    """
    Execute the marketable part of `incoming` against the opposite queue and
    rest the remainder. Each resting order touched yields one trade at the
    resting order's price.
    """
    side = incoming.side
    if side is None:
        raise EngineError(f"order {incoming.order_id} is a cancel, not a submission")
    trade_ids = trade_ids if trade_ids is not None else itertools.count(1)
    timestamp = incoming.timestamp if timestamp is None else timestamp
    phase = phase or classify_phase(timestamp)
    aggressor = Aggressor.BUY if side is Side.BID else Aggressor.SELL

    trades: list[Trade] = []
    remaining = incoming.size
    opposite = book.opposite(side)
    while remaining > 0 and opposite:
        head: RestingOrder = opposite[0]
        if side is Side.BID and incoming.price < head.price:
            break
        if side is Side.ASK and incoming.price > head.price:
            break

        size = min(remaining, head.remaining)
        if side is Side.BID:
            seller, buyer, bid_id, ask_id = head.trader_id, incoming.trader_id, incoming.order_id, head.order_id
        else:
            seller, buyer, bid_id, ask_id = incoming.trader_id, head.trader_id, head.order_id, incoming.order_id
        trades.append(Trade(
            trade_id=next(trade_ids),
            timestamp=timestamp,
            seller_id=seller,
            buyer_id=buyer,
            price=head.price,
            size=size,
            phase=phase,
            aggressor=aggressor,
            bid_order_id=bid_id,
            ask_order_id=ask_id,
        ))
        remaining -= size
        head.remaining -= size
        if head.remaining == 0:
            book.remove(head)

    if remaining > 0:
        book.add(RestingOrder(
            order_id=incoming.order_id,
            trader_id=incoming.trader_id,
            side=side,
            price=incoming.price,
            remaining=remaining,
            size=incoming.size,
            timestamp=incoming.timestamp,
        ))
    return trades


def rest_order(book: OrderBook, incoming: OrderEvent) -> None:
    """Queue a submission without matching (call-auction collection)."""
    book.add(RestingOrder(
        order_id=incoming.order_id,
        trader_id=incoming.trader_id,
        side=incoming.side,
        price=incoming.price,
        remaining=incoming.size,
        size=incoming.size,
        timestamp=incoming.timestamp,
    ))


def apply_cancel(
    book: OrderBook,
    cancel: OrderEvent,
    cancel_mode: CancelMode = CancelMode.TARGET,
) -> CancelOutcome:
    """Remove the remaining shares of the cancel's target; NoOp if it is no longer resting."""
    target: Optional[RestingOrder]
    if cancel.cancel_target is None:
        if cancel_mode is not CancelMode.OLDEST_OPEN:
            return NoOp(NOOP_UNKNOWN)
        target = book.oldest_open(cancel.trader_id)
        if target is None:
            return NoOp(NOOP_NO_OPEN_ORDER)
    else:
        target = book.orders.get(cancel.cancel_target)
        if target is None:
            return NoOp(NOOP_FILLED)

    shares = target.remaining
    book.remove(target)
    return Canceled(order_id=target.order_id, shares=shares)


@dataclass
class ReplayResult:
    date: date
    trades: tuple[Trade, ...]
    ratios: TransactionRatios
    auction: Optional[AuctionResult] = None
    snapshots: dict[int, tuple[LevelSnapshot, ...]] = field(default_factory=dict)
    canceled_orders: int = 0
    canceled_shares: int = 0
    expired_orders: int = 0
    expired_shares: int = 0
    noop_cancels: int = 0
    unknown_cancels: int = 0

    @property
    def volume(self) -> int:
        return sum(t.size for t in self.trades)


class MatchingEngine:
    """
    Replays one day at a time; the book belongs to the engine for the whole replay.

    Args:
        cancel_mode: how cancels without a target are resolved
        snapshot_times: timestamps at which to record the book (after any
            milestone scheduled for the same time)
        check_invariants: verify the book is uncrossed after every
            continuous-phase event
    """

    def __init__(
        self,
        cancel_mode: CancelMode = CancelMode.TARGET,
        snapshot_times: Iterable[int] = (),
        check_invariants: bool = False,
    ):
        self.cancel_mode = cancel_mode
        self.snapshot_times = tuple(sorted(set(snapshot_times)))
        self.check_invariants = check_invariants
        self.tracer = trace.get_tracer(__name__)
        self._reset(None)

    def _reset(self, day: Optional[DayStream]) -> None:
        self.day = day
        self.book = OrderBook()
        self.trade_ids = itertools.count(1)
        self.trades: list[Trade] = []
        self.auction: Optional[AuctionResult] = None
        self.lunch_queue: list[OrderEvent] = []
        self.seen_orders: set[int] = set()
        self.snapshots: dict[int, tuple[LevelSnapshot, ...]] = {}
        self.counts = dict(canceled_orders=0, canceled_shares=0, expired_orders=0,
                           expired_shares=0, noop_cancels=0, unknown_cancels=0)

        schedule: list[tuple[int, int, Callable[[], None]]] = [
            (AUCTION_TIME, 0, self._opening_auction),
            (CONTINUOUS_START, 0, self._flush_frozen_cancels),
            (AFTERNOON_START, 0, self._flush_lunch_queue),
            (MARKET_CLOSE, 0, self._expire_all),
        ]
        for ts in self.snapshot_times:
            schedule.append((ts, 1, self._snapshot_at(ts)))
        schedule.sort(key=lambda item: item[:2])
        self.milestones = [(ts, action) for ts, _, action in schedule]
        self.clock = -1

    def run_day(self, day: DayStream) -> ReplayResult:
        """Replay a validated day and return its trade ledger and counts."""
        self._reset(day)
        with self.tracer.start_as_current_span("run_day") as span:
            span.set_attribute("date", str(day.date))
            span.set_attribute("events", len(day.events))

            for event in day.events:
                if event.timestamp < self.clock:
                    raise EngineError(
                        f"{day.date}: event {event.order_id} at {format_timestamp(event.timestamp)} "
                        f"arrives after {format_timestamp(self.clock)}"
                    )
                self._advance_to(event.timestamp)
                self.clock = event.timestamp
                self._dispatch(event)
            self._advance_to(CENTISECONDS_PER_DAY)

            span.set_attribute("trades", len(self.trades))
            span.add_event("replayed", attributes={"volume": sum(t.size for t in self.trades)})

        trades = tuple(self.trades)
        result = ReplayResult(
            date=day.date,
            trades=trades,
            ratios=transaction_ratios(day, trades),
            auction=self.auction,
            snapshots=dict(self.snapshots),
            **self.counts,
        )
        logger.info(
            f"Replayed {day.date}: {len(trades)} trades, {result.volume} shares",
            extra={"date": str(day.date), "canceled": result.canceled_orders, "expired": result.expired_orders},
        )
        return result

    def _advance_to(self, timestamp: int) -> None:
        while self.milestones and self.milestones[0][0] <= timestamp:
            _, action = self.milestones.pop(0)
            action()

    def _dispatch(self, event: OrderEvent) -> None:
        phase = classify_phase(event.timestamp)

        if event.is_cancel:
            if phase is SessionPhase.OPEN_CALL_AUCTION and event.timestamp < FROZEN_CANCEL_START:
                self._cancel(event)
            elif phase in (SessionPhase.OPEN_CALL_AUCTION, SessionPhase.COOL_PERIOD):
                self.book.frozen_cancels.append(event)
            elif phase is SessionPhase.LUNCH:
                self.lunch_queue.append(event)
            else:
                self._cancel(event)
            return

        if phase is SessionPhase.CLOSED:
            raise EngineError(
                f"{self.day.date}: order {event.order_id} submitted outside trading hours; validate the day first"
            )
        self.seen_orders.add(event.order_id)
        if phase is SessionPhase.OPEN_CALL_AUCTION:
            rest_order(self.book, event)
        elif phase is SessionPhase.LUNCH:
            self.lunch_queue.append(event)
        else:
            self._match(event, phase, event.timestamp)

    def _match(self, event: OrderEvent, phase: SessionPhase, timestamp: int) -> None:
        self.trades.extend(match_continuous(self.book, event, self.trade_ids, phase, timestamp))
        if self.check_invariants and self.book.is_crossed():
            raise EngineError(f"book crossed after order {event.order_id}")

    def _cancel(self, event: OrderEvent) -> None:
        outcome = apply_cancel(self.book, event, self.cancel_mode)
        if isinstance(outcome, Canceled):
            self.counts["canceled_orders"] += 1
            self.counts["canceled_shares"] += outcome.shares
            return
        self.counts["noop_cancels"] += 1
        if event.cancel_target is not None and event.cancel_target not in self.seen_orders:
            self.counts["unknown_cancels"] += 1
            logger.warning(
                f"{self.day.date}: cancel {event.order_id} targets unknown order {event.cancel_target}",
                extra={"date": str(self.day.date), "order_id": event.order_id},
            )

    def _opening_auction(self) -> None:
        crossing = call_auction_price(self.book, self.day.prev_close)
        if crossing is not None:
            price, _ = crossing
            self.auction = execute_call_auction(self.book, price, self.trade_ids)
            self.trades.extend(self.auction.trades)
        self._flush_frozen_cancels()

    def _flush_frozen_cancels(self) -> None:
        buffered, self.book.frozen_cancels = self.book.frozen_cancels, []
        for cancel in buffered:
            self._cancel(cancel)

    def _flush_lunch_queue(self) -> None:
        queued, self.lunch_queue = self.lunch_queue, []
        for event in queued:
            if event.is_cancel:
                self._cancel(event)
            else:
                self._match(event, SessionPhase.AFTERNOON_CONTINUOUS, AFTERNOON_START)

    def _expire_all(self) -> None:
        expired = self.book.clear()
        self.counts["expired_orders"] += len(expired)
        self.counts["expired_shares"] += sum(order.remaining for order in expired)

    def _snapshot_at(self, timestamp: int) -> Callable[[], None]:
        def take() -> None:
            self.snapshots[timestamp] = self.book.snapshot()
        return take


def run_day(day: DayStream, cancel_mode: CancelMode = CancelMode.TARGET) -> ReplayResult:
    return MatchingEngine(cancel_mode=cancel_mode).run_day(day)
