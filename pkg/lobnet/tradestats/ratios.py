"""Trade-size samples and executed/placed order ratios."""
from __future__ import annotations

from typing import Iterable, Sequence

from lobnet.common.models.records import Action, DayStream, Trade, TransactionRatios


def trade_size_sample(trades: Iterable[Trade]) -> list[int]:
    """Sizes v of the given trades, in ledger order."""
    return [trade.size for trade in trades]


def _ratio(executed: int, placed: int) -> float | None:
    return executed / placed if placed > 0 else None


def transaction_ratios(day: DayStream, trades: Sequence[Trade]) -> TransactionRatios:
    """
    An order counts as executed if any part of it ever traded. Cancels are
    not orders here, and the day is expected to hold valid events only.
    """
    bids = {e.order_id for e in day.events if e.action is Action.SUBMIT_BID}
    asks = {e.order_id for e in day.events if e.action is Action.SUBMIT_ASK}
    filled_bids = {t.bid_order_id for t in trades} & bids
    filled_asks = {t.ask_order_id for t in trades} & asks

    placed = len(bids) + len(asks)
    executed = len(filled_bids) + len(filled_asks)
    return TransactionRatios(
        r=_ratio(executed, placed),
        r_ask=_ratio(len(filled_asks), len(asks)),
        r_bid=_ratio(len(filled_bids), len(bids)),
        placed_ask=len(asks),
        placed_bid=len(bids),
        executed_ask=len(filled_asks),
        executed_bid=len(filled_bids),
    )
