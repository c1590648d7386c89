from lobnet.matchengine.auction import call_auction_price, execute_call_auction
from lobnet.matchengine.book import OrderBook
from lobnet.matchengine.engine import (
    Canceled,
    MatchingEngine,
    NoOp,
    ReplayResult,
    apply_cancel,
    match_continuous,
    run_day,
)
from lobnet.matchengine.reference import ReferenceMatcher

__all__ = [
    "OrderBook",
    "MatchingEngine",
    "ReplayResult",
    "ReferenceMatcher",
    "Canceled",
    "NoOp",
    "run_day",
    "call_auction_price",
    "execute_call_auction",
    "match_continuous",
    "apply_cancel",
]
