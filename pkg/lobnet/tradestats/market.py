"""Daily price/volume series and cross-series correlations."""
from __future__ import annotations

import logging
import math
from collections import OrderedDict
from datetime import date
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from lobnet.common.core.exceptions import StatsError
from lobnet.common.models.records import Aggressor, Trade
from lobnet.common.models.schemas import DailyMarketStats

logger = logging.getLogger(__name__)

# (x, y) pairs reported in the correlation report
CORRELATION_PAIRS = (
    ("close", "N"),
    ("close", "N_ask"),
    ("close", "N_bid"),
    ("close", "N_e"),
    ("r_LC", "volatility"),
    ("r_2LC", "volatility"),
    ("r_LC", "volume"),
    ("r_2LC", "volume"),
)


def daily_market_stats(day: date, trades: Sequence[Trade]) -> DailyMarketStats:
    """Close, log price range and volume from the day's trade prices."""
    if not trades:
        return DailyMarketStats(date=day, close=None, volatility=0.0, total_volume=0, trade_count=0)
    prices = [t.price for t in trades]
    p_max, p_min = max(prices), min(prices)
    volatility = math.log(p_max) - math.log(p_min) if len(trades) >= 2 else 0.0
    return DailyMarketStats(
        date=day,
        close=trades[-1].price,
        volatility=volatility,
        total_volume=sum(t.size for t in trades),
        trade_count=len(trades),
        p_max=p_max,
        p_min=p_min,
    )


def pearson(series_a: Sequence[float], series_b: Sequence[float]) -> float:
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    if a.shape != b.shape:
        raise StatsError(f"series lengths differ: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise StatsError("pearson needs at least two points")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise StatsError("pearson is undefined for a constant series")
    coefficient = stats.pearsonr(a, b)[0]
    return float(np.clip(coefficient, -1.0, 1.0))


def correlation_report(
    rows: Sequence[Mapping[str, Optional[float]]],
    pairs: Iterable[tuple[str, str]] = CORRELATION_PAIRS,
) -> dict[str, dict]:
    """
    Pearson coefficients between daily series. Days missing either value are
    dropped pairwise; an undefined coefficient is reported with its reason.
    """
    report: dict[str, dict] = OrderedDict()
    for x_name, y_name in pairs:
        points = [
            (row[x_name], row[y_name])
            for row in rows
            if row.get(x_name) is not None and row.get(y_name) is not None
        ]
        key = f"{x_name}~{y_name}"
        try:
            xs, ys = zip(*points) if points else ((), ())
            report[key] = {"x": x_name, "y": y_name, "n": len(points), "r": pearson(xs, ys)}
        except StatsError as e:
            logger.debug(f"Correlation {key} undefined: {e}")
            report[key] = {"x": x_name, "y": y_name, "n": len(points), "r": None, "reason": str(e)}
    return report


def aggregate_trade_sizes(trades: Iterable[Trade]) -> list[int]:
    """
    Aggregate size of each aggressive order: the sum of all fills it caused.
    Auction trades have no aggressor and are left out.
    """
    totals: dict[tuple[str, int], int] = OrderedDict()
    for trade in trades:
        if trade.aggressor is Aggressor.BUY:
            key = ("bid", trade.bid_order_id)
        elif trade.aggressor is Aggressor.SELL:
            key = ("ask", trade.ask_order_id)
        else:
            continue
        totals[key] = totals.get(key, 0) + trade.size
    return list(totals.values())


def pooled_sample(daily_samples: Iterable[Sequence[int]]) -> list[int]:
    """Whole-period sample: daily samples concatenated in day order."""
    pooled: list[int] = []
    for sample in daily_samples:
        pooled.extend(sample)
    return pooled


def mean_ratio(values: Iterable[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None
