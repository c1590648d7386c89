"""Order validity rules: the daily price-limit band and trading hours."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Union

from lobnet.common.models.records import Action, DayStream, OrderEvent, SessionPhase
from lobnet.orderflow.phases import classify_phase

logger = logging.getLogger(__name__)

REASON_PRICE_LIMIT = "price limit"
REASON_OUTSIDE_HOURS = "outside trading hours"


@dataclass(frozen=True, slots=True)
class Valid:
    pass


@dataclass(frozen=True, slots=True)
class Invalid:
    reason: str


Validity = Union[Valid, Invalid]

VALID = Valid()


@dataclass(frozen=True, slots=True)
class OrderFlowSummary:
    """Per-day order-flow counts, as reported in the data description."""
    date: object
    bid_orders: int
    ask_orders: int
    cancels: int
    invalid: int
    traders: int
    invalid_reasons: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.bid_orders + self.ask_orders + self.cancels + self.invalid


def price_band(prev_close: int, limit_fraction: float) -> tuple[int, int]:
    """Inclusive [low, high] band in ticks, rounded half-up to whole ticks."""
    base = Decimal(prev_close)
    fraction = Decimal(str(limit_fraction))
    low = (base * (1 - fraction)).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    high = (base * (1 + fraction)).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    return int(low), int(high)


def _check(event: OrderEvent, low: int, high: int) -> Validity:
    if event.action is Action.CANCEL:
        return VALID
    if classify_phase(event.timestamp) is SessionPhase.CLOSED:
        return Invalid(REASON_OUTSIDE_HOURS)
    if not low <= event.price <= high:
        return Invalid(REASON_PRICE_LIMIT)
    return VALID


def validate_event(event: OrderEvent, prev_close: int, limit_fraction: float) -> Validity:
    """Cancels are always valid here; submissions must fall in trading hours and inside the band."""
    return _check(event, *price_band(prev_close, limit_fraction))


def validate_day(day: DayStream) -> tuple[DayStream, list[tuple[OrderEvent, Invalid]], OrderFlowSummary]:
    """
    Split a day into the events the engine may see and the invalid ones.

    Returns:
        (day with valid events only, [(event, Invalid)], summary counts)
    """
    valid: list[OrderEvent] = []
    invalid: list[tuple[OrderEvent, Invalid]] = []
    counts: Counter = Counter()
    traders: set[str] = set()

    low, high = price_band(day.prev_close, day.limit_fraction)
    for event in day.events:
        traders.add(event.trader_id)
        verdict = _check(event, low, high)
        if isinstance(verdict, Invalid):
            invalid.append((event, verdict))
            continue
        valid.append(event)
        counts[event.action] += 1

    reasons = Counter(v.reason for _, v in invalid)
    summary = OrderFlowSummary(
        date=day.date,
        bid_orders=counts[Action.SUBMIT_BID],
        ask_orders=counts[Action.SUBMIT_ASK],
        cancels=counts[Action.CANCEL],
        invalid=len(invalid),
        traders=len(traders),
        invalid_reasons=dict(sorted(reasons.items())),
    )
    if invalid:
        logger.info(
            f"{day.date}: {len(invalid)} invalid orders",
            extra={"date": str(day.date), "invalid_reasons": summary.invalid_reasons},
        )

    cleaned = DayStream(
        date=day.date,
        events=tuple(valid),
        prev_close=day.prev_close,
        limit_fraction=day.limit_fraction,
    )
    return cleaned, invalid, summary
