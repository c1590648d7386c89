from lobnet.tradestats.market import (
    aggregate_trade_sizes,
    correlation_report,
    daily_market_stats,
    pearson,
    pooled_sample,
)
from lobnet.tradestats.ratios import trade_size_sample, transaction_ratios

__all__ = [
    "trade_size_sample",
    "transaction_ratios",
    "daily_market_stats",
    "pearson",
    "correlation_report",
    "aggregate_trade_sizes",
    "pooled_sample",
]
