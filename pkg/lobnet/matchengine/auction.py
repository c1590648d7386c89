"""Opening call auction: volume-maximizing clearing price and pairwise allocation."""
from __future__ import annotations

import itertools
import logging
from typing import Iterator, Optional

import numpy as np

from lobnet.common.models.records import Aggressor, AuctionResult, SessionPhase, Trade
from lobnet.matchengine.book import OrderBook
from lobnet.orderflow.phases import AUCTION_TIME

logger = logging.getLogger(__name__)


def executable_volumes(book: OrderBook) -> Optional[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Cumulative demand and supply on every tick between the lowest ask and the
    highest bid.

    Returns:
        (prices, bid_cum, ask_cum) where bid_cum[i] is the bid shares priced
        >= prices[i] and ask_cum[i] the ask shares priced <= prices[i], or
        None when the book holds no crossing.
    """
    if not book.bids or not book.asks:
        return None
    low = book.asks[0].price
    high = book.bids[0].price
    if high < low:
        return None

    prices = np.arange(low, high + 1, dtype=np.int64)
    bid_at = np.zeros(len(prices), dtype=np.int64)
    ask_at = np.zeros(len(prices), dtype=np.int64)
    # both sides come in priority order, so stop at the first order outside [low, high]
    for order in book.bids:
        if order.price < low:
            break
        bid_at[order.price - low] += order.remaining
    for order in book.asks:
        if order.price > high:
            break
        ask_at[order.price - low] += order.remaining

    bid_cum = np.cumsum(bid_at[::-1])[::-1]
    ask_cum = np.cumsum(ask_at)
    return prices, bid_cum, ask_cum


def call_auction_price(book: OrderBook, prev_close: int) -> Optional[tuple[int, int]]:
    """
    Clearing price maximizing executable volume.

    Ties go, in order, to the smallest bid/ask imbalance at the price, then
    the price closest to prev_close, then the lower price.
    """
    curves = executable_volumes(book)
    if curves is None:
        return None
    prices, bid_cum, ask_cum = curves
    volume = np.minimum(bid_cum, ask_cum)
    best = volume.max()
    if best <= 0:
        return None

    # np.lexsort sorts by the last key first
    imbalance = np.abs(bid_cum - ask_cum)
    distance = np.abs(prices - prev_close)
    order = np.lexsort((prices, distance, imbalance, -volume))
    chosen = order[0]
    return int(prices[chosen]), int(volume[chosen])


def execute_call_auction(
    book: OrderBook,
    price: int,
    trade_ids: Iterator[int] | None = None,
    timestamp: int = AUCTION_TIME,
) -> AuctionResult:
    """
    Pair eligible bids (>= price) and asks (<= price) head to head in
    price-time priority; every pairing is one trade at the clearing price.
    """
    trade_ids = trade_ids if trade_ids is not None else itertools.count(1)
    trades: list[Trade] = []
    filled = []

    bids = iter(list(itertools.takewhile(lambda o: o.price >= price, book.bids)))
    asks = iter(list(itertools.takewhile(lambda o: o.price <= price, book.asks)))
    bid = next(bids, None)
    ask = next(asks, None)
    while bid is not None and ask is not None:
        size = min(bid.remaining, ask.remaining)
        trades.append(Trade(
            trade_id=next(trade_ids),
            timestamp=timestamp,
            seller_id=ask.trader_id,
            buyer_id=bid.trader_id,
            price=price,
            size=size,
            phase=SessionPhase.OPEN_CALL_AUCTION,
            aggressor=Aggressor.AUCTION,
            bid_order_id=bid.order_id,
            ask_order_id=ask.order_id,
        ))
        bid.remaining -= size
        ask.remaining -= size
        if bid.remaining == 0:
            filled.append(bid)
            bid = next(bids, None)
        if ask.remaining == 0:
            filled.append(ask)
            ask = next(asks, None)

    for order in filled:
        book.remove(order)

    result = AuctionResult(
        clearing_price=price,
        executed_volume=sum(t.size for t in trades),
        trades=tuple(trades),
    )
    logger.debug(f"Call auction cleared {result.executed_volume} shares at {price} in {len(trades)} trades")
    return result
