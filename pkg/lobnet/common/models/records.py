"""
Hot-path records shared by the replay pipeline.

These are slotted dataclasses rather than pydantic models: a trading day
holds 10^4-10^5 events and every one of them passes through the engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional


class Action(str, Enum):
    SUBMIT_BID = "B"
    SUBMIT_ASK = "S"
    CANCEL = "C"


class Side(str, Enum):
    BID = "bid"
    ASK = "ask"


class Aggressor(str, Enum):
    BUY = "Buy"
    SELL = "Sell"
    AUCTION = "Auction"


class SessionPhase(str, Enum):
    CLOSED = "Closed"
    OPEN_CALL_AUCTION = "OpenCallAuction"
    COOL_PERIOD = "CoolPeriod"
    MORNING_CONTINUOUS = "MorningContinuous"
    LUNCH = "Lunch"
    AFTERNOON_CONTINUOUS = "AfternoonContinuous"

    @property
    def is_continuous(self) -> bool:
        return self in (SessionPhase.MORNING_CONTINUOUS, SessionPhase.AFTERNOON_CONTINUOUS)


@dataclass(frozen=True, slots=True)
class OrderEvent:
    order_id: int
    timestamp: int  # centiseconds since midnight
    trader_id: str
    action: Action
    price: int  # ticks of 0.01
    size: int  # shares
    cancel_target: Optional[int] = None

    @property
    def is_cancel(self) -> bool:
        return self.action is Action.CANCEL

    @property
    def side(self) -> Optional[Side]:
        if self.action is Action.SUBMIT_BID:
            return Side.BID
        if self.action is Action.SUBMIT_ASK:
            return Side.ASK
        return None

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.timestamp, self.order_id)


@dataclass(frozen=True, slots=True)
class DayStream:
    date: date
    events: tuple[OrderEvent, ...]
    prev_close: int
    limit_fraction: float = 0.10

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True, slots=True)
class RejectedRow:
    line: int
    reason: str
    raw: str


@dataclass(slots=True)
class RestingOrder:
    order_id: int
    trader_id: str
    side: Side
    price: int
    remaining: int
    size: int
    timestamp: int

    @property
    def arrival(self) -> tuple[int, int]:
        return (self.timestamp, self.order_id)


@dataclass(frozen=True, slots=True)
class Trade:
    trade_id: int
    timestamp: int
    seller_id: str
    buyer_id: str
    price: int
    size: int
    phase: SessionPhase
    aggressor: Aggressor
    bid_order_id: int = -1
    ask_order_id: int = -1

    @property
    def is_self_trade(self) -> bool:
        return self.seller_id == self.buyer_id


@dataclass(frozen=True, slots=True)
class AuctionResult:
    clearing_price: int
    executed_volume: int
    trades: tuple[Trade, ...] = field(default_factory=tuple)


@dataclass(frozen=True, slots=True)
class TransactionRatios:
    """Executed/placed order ratios; None where the class had no placed orders."""
    r: Optional[float]
    r_ask: Optional[float]
    r_bid: Optional[float]
    placed_ask: int = 0
    placed_bid: int = 0
    executed_ask: int = 0
    executed_bid: int = 0


@dataclass(frozen=True, slots=True)
class DegreeRecord:
    trader_id: str
    k_ask: int
    k_bid: int
    s_ask: int = 0
    s_bid: int = 0

    @property
    def k(self) -> int:
        return self.k_ask + self.k_bid
