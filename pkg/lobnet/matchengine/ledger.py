"""Trade-ledger and book-snapshot files, and the cross-check against a reference price/volume series."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Optional, Sequence

from lobnet.common.core.exceptions import ConfigError, OrderFlowError
from lobnet.common.models.records import Aggressor, SessionPhase, Trade
from lobnet.common.utils.artifacts import read_csv_rows, write_csv
from lobnet.matchengine.book import LevelSnapshot
from lobnet.orderflow.parser import RowError, parse_price

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = (
    "trade_id", "timestamp", "seller_id", "buyer_id", "price", "size",
    "phase", "aggressor", "bid_order_id", "ask_order_id",
)
SNAPSHOT_COLUMNS = ("timestamp", "side", "price", "position", "order_id", "remaining")


def ledger_file_name(day: date) -> str:
    return f"{day:%Y%m%d}_trades.csv"


def write_ledger(path: Path, trades: Iterable[Trade], digest: str) -> Path:
    rows = (
        (t.trade_id, t.timestamp, t.seller_id, t.buyer_id, t.price, t.size,
         t.phase.value, t.aggressor.value, t.bid_order_id, t.ask_order_id)
        for t in trades
    )
    return write_csv(path, LEDGER_COLUMNS, rows, digest)


def read_ledger(path: Path) -> list[Trade]:
    trades = []
    for row in read_csv_rows(path):
        trades.append(Trade(
            trade_id=int(row["trade_id"]),
            timestamp=int(row["timestamp"]),
            seller_id=row["seller_id"],
            buyer_id=row["buyer_id"],
            price=int(row["price"]),
            size=int(row["size"]),
            phase=SessionPhase(row["phase"]),
            aggressor=Aggressor(row["aggressor"]),
            bid_order_id=int(row.get("bid_order_id") or -1),
            ask_order_id=int(row.get("ask_order_id") or -1),
        ))
    return trades


def ledger_date(path: Path) -> date:
    stem = Path(path).name[:8]
    try:
        return date(int(stem[:4]), int(stem[4:6]), int(stem[6:8]))
    except ValueError as e:
        raise OrderFlowError(f"ledger file {path} does not start with YYYYMMDD") from e


def write_snapshots(path: Path, snapshots: dict[int, tuple[LevelSnapshot, ...]], digest: str) -> Path:
    rows = []
    for ts in sorted(snapshots):
        for level in snapshots[ts]:
            for position, (order_id, remaining) in enumerate(level.queue):
                rows.append((ts, level.side.value, level.price, position, order_id, remaining))
    return write_csv(path, SNAPSHOT_COLUMNS, rows, digest)


@dataclass(frozen=True, slots=True)
class ReferencePoint:
    date: date
    close: int
    volume: int


@dataclass(frozen=True, slots=True)
class Discrepancy:
    date: date
    close: Optional[int]
    reference_close: int
    price_diff: Optional[int]  # ticks, None when the replay has no trades
    volume: int
    reference_volume: int
    volume_diff: int


def _parse_reference_price(raw: str) -> int:
    raw = raw.strip()
    if "." not in raw:
        return int(raw)
    try:
        return parse_price(raw)
    except RowError as e:
        raise OrderFlowError(f"reference close {raw!r}: {e}") from e


def read_reference_series(path: Path) -> dict[date, ReferencePoint]:
    """CSV `date,close,volume`; close as a two-decimal price or integer ticks."""
    series = {}
    for number, row in enumerate(read_csv_rows(path), start=1):
        try:
            raw_date = row["date"].strip()
            day = date.fromisoformat(raw_date) if "-" in raw_date else \
                date(int(raw_date[:4]), int(raw_date[4:6]), int(raw_date[6:8]))
            series[day] = ReferencePoint(day, _parse_reference_price(row["close"]), int(row["volume"]))
        except (KeyError, TypeError, ValueError, OrderFlowError) as e:
            raise ConfigError(f"reference series {path}, row {number}: {e}") from e
    return series


def compare_with_reference(
    day: date,
    trades: Sequence[Trade],
    reference: dict[date, ReferencePoint],
) -> Optional[Discrepancy]:
    point = reference.get(day)
    if point is None:
        return None
    close = trades[-1].price if trades else None
    volume = sum(t.size for t in trades)
    discrepancy = Discrepancy(
        date=day,
        close=close,
        reference_close=point.close,
        price_diff=None if close is None else abs(close - point.close),
        volume=volume,
        reference_volume=point.volume,
        volume_diff=volume - point.volume,
    )
    if discrepancy.price_diff or discrepancy.volume_diff:
        logger.warning(
            f"{day}: replay differs from reference (price {discrepancy.price_diff}, volume {discrepancy.volume_diff})",
            extra={"date": str(day)},
        )
    return discrepancy
