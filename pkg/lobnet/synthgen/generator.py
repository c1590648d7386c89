"""
Synthetic order-flow days.

Prices follow a reflected +-1 tick random walk inside the daily price band;
each order is placed near the walk's current value, on the far side of it
when marketable. Sizes are whole lots drawn from a discrete power law.
"""
from __future__ import annotations

import logging
from datetime import date, timedelta
from typing import Iterator

import numpy as np

from lobnet.common.core.exceptions import ConfigError
from lobnet.common.models.records import Action, DayStream, OrderEvent, SessionPhase
from lobnet.common.models.schemas import Discreteness, GenConfig
from lobnet.common.utils.rng import STREAM_SYNTH, derive_int_seed, derive_rng
from lobnet.orderflow.phases import phase_intervals
from lobnet.orderflow.validation import price_band
from lobnet.plfit.sampling import rand_powerlaw

logger = logging.getLogger(__name__)

# phases that receive generated events, in session order
GENERATED_PHASES = (
    SessionPhase.OPEN_CALL_AUCTION,
    SessionPhase.COOL_PERIOD,
    SessionPhase.MORNING_CONTINUOUS,
    SessionPhase.AFTERNOON_CONTINUOUS,
)


def _timestamps(config: GenConfig, rng: np.random.Generator) -> np.ndarray:
    weights = np.array([config.phase_allocation.get(p.value, 0.0) for p in GENERATED_PHASES], dtype=float)
    counts = rng.multinomial(config.events, weights / weights.sum())
    stamps = []
    for phase, count in zip(GENERATED_PHASES, counts):
        if count == 0:
            continue
        (start, end), = phase_intervals(phase)
        if count > end - start:
            raise ConfigError(f"{count} events do not fit in {phase.value} with distinct timestamps")
        offsets = rng.choice(end - start, size=int(count), replace=False)
        stamps.append(start + np.sort(offsets))
    return np.concatenate(stamps) if stamps else np.empty(0, dtype=np.int64)


def generate_day(config: GenConfig) -> DayStream:
    """One canonical day; a pure function of the config (seed included)."""
    rng = derive_rng(config.rng_seed, STREAM_SYNTH)
    low, high = price_band(config.prev_close, config.limit_fraction)
    if low <= 0 or low > config.prev_close or high < config.prev_close:
        raise ConfigError(f"price band [{low}, {high}] is unusable for prev_close {config.prev_close}")

    stamps = _timestamps(config, rng)
    n = len(stamps)
    traders = rng.integers(config.traders, size=n)
    steps = rng.choice(np.array([-1, 1]), size=n)
    is_cancel_draw = rng.random(n) < config.cancel_prob
    target_draw = rng.random(n)
    is_bid = rng.random(n) < 0.5
    marketable = rng.random(n) < config.marketable_prob
    offsets = rng.integers(0, config.max_offset_ticks + 1, size=n)
    lots = rand_powerlaw(config.size_exponent, config.size_xmin_lots, n, Discreteness.DISCRETE, rng)
    sizes = np.minimum(lots, config.max_lots).astype(np.int64) * config.lot

    events: list[OrderEvent] = []
    open_orders: list[OrderEvent] = []
    walk = config.prev_close
    for i in range(n):
        walk += int(steps[i])
        if walk > high:
            walk = 2 * high - walk
        elif walk < low:
            walk = 2 * low - walk
        order_id = i + 1
        trader = f"t{int(traders[i]):05d}"

        if is_cancel_draw[i] and open_orders:
            k = int(target_draw[i] * len(open_orders))
            target = open_orders[k]
            open_orders[k] = open_orders[-1]
            open_orders.pop()
            events.append(OrderEvent(
                order_id=order_id,
                timestamp=int(stamps[i]),
                trader_id=target.trader_id,
                action=Action.CANCEL,
                price=target.price,
                size=target.size,
                cancel_target=target.order_id,
            ))
            continue

        # marketable orders cross the walk value, resting ones stay on their own side
        offset = int(offsets[i]) + (1 if marketable[i] else 0)
        toward = 1 if is_bid[i] == bool(marketable[i]) else -1
        price = min(max(walk + toward * offset, low), high)
        event = OrderEvent(
            order_id=order_id,
            timestamp=int(stamps[i]),
            trader_id=trader,
            action=Action.SUBMIT_BID if is_bid[i] else Action.SUBMIT_ASK,
            price=price,
            size=int(sizes[i]),
        )
        events.append(event)
        open_orders.append(event)

    logger.debug(f"Generated {len(events)} events for {config.date}", extra={"date": str(config.date)})
    return DayStream(
        date=config.date,
        events=tuple(events),
        prev_close=config.prev_close,
        limit_fraction=config.limit_fraction,
    )


def next_trading_date(day: date) -> date:
    day += timedelta(days=1)
    while day.weekday() >= 5:
        day += timedelta(days=1)
    return day


def generate_days(config: GenConfig, days: int, master_seed: int) -> Iterator[DayStream]:
    """
    Consecutive weekdays starting at config.date. Day i draws from its own
    stream under master_seed; each day's prev_close is the previous day's
    last submitted price, or its own prev_close when it had no submissions.
    """
    current = config
    for i in range(days):
        day_config = current.model_copy(update={"rng_seed": derive_int_seed(master_seed, STREAM_SYNTH, i)})
        day = generate_day(day_config)
        yield day
        closes = [e.price for e in day.events if not e.is_cancel]
        current = current.model_copy(update={
            "date": next_trading_date(current.date),
            "prev_close": closes[-1] if closes else current.prev_close,
        })
