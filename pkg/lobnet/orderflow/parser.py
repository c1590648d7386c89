"""
Canonical order-flow codec.

A stream starts with the header line `#lobnet-orderflow v1`. Each trading day
is either declared in-stream with `#day YYYYMMDD prev_close=<ticks>` or taken
from the FormatSpec defaults (one file per day plus its metadata). Data rows
are `timestamp,trader_id,action,price,size,order_id[,cancel_target]`.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Iterable, Optional

from opentelemetry import trace

from lobnet.common.core.exceptions import DayAbortedError, OrderFlowError
from lobnet.common.models.records import Action, DayStream, OrderEvent, RejectedRow
from lobnet.common.models.schemas import CancelMode, FormatSpec
from lobnet.orderflow.phases import decode_timestamp, encode_timestamp

logger = logging.getLogger(__name__)

HEADER = "#lobnet-orderflow v1"
DAY_DIRECTIVE = "#day"

_PRICE_PATTERN = re.compile(r"^\d+\.\d{2}$")
_ACTIONS = {action.value: action for action in Action}


class RowError(ValueError):
    """A single malformed row; becomes a RejectedRow."""


@dataclass
class ParseResult:
    days: list[DayStream] = field(default_factory=list)
    rejects: list[RejectedRow] = field(default_factory=list)
    failed_days: list[DayAbortedError] = field(default_factory=list)
    rows: int = 0

    @property
    def parsed_count(self) -> int:
        return sum(len(day.events) for day in self.days)

    @property
    def rejected_count(self) -> int:
        return len(self.rejects)


@dataclass
class _DayBuilder:
    date: date
    prev_close: int
    limit_fraction: float
    events: list[OrderEvent] = field(default_factory=list)
    rows: list[tuple[int, str]] = field(default_factory=list)  # (line, raw) per accepted event
    order_ids: set[int] = field(default_factory=set)
    last_timestamp: int = -1
    aborted: Optional[DayAbortedError] = None

    def build(self) -> DayStream:
        events = tuple(sorted(self.events, key=lambda e: e.sort_key))
        return DayStream(
            date=self.date,
            events=events,
            prev_close=self.prev_close,
            limit_fraction=self.limit_fraction,
        )


def parse_price(raw: str) -> int:
    raw = raw.strip()
    if not _PRICE_PATTERN.match(raw):
        raise RowError(f"bad price {raw!r}")
    whole, frac = raw.split(".")
    return int(whole) * 100 + int(frac)


def format_price(ticks: int) -> str:
    return f"{ticks // 100}.{ticks % 100:02d}"


def _parse_day_directive(line: str, fmt: FormatSpec) -> tuple[date, int, float]:
    parts = line.split()
    if len(parts) < 2:
        raise OrderFlowError(f"malformed day directive {line!r}")
    try:
        day = datetime.strptime(parts[1], "%Y%m%d").date()
    except ValueError as e:
        raise OrderFlowError(f"malformed day directive {line!r}: {e}") from e

    options = {}
    for part in parts[2:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise OrderFlowError(f"malformed day directive option {part!r}")
        options[key] = value

    prev_close = options.get("prev_close", fmt.default_prev_close)
    if prev_close is None:
        raise OrderFlowError(f"day directive {line!r} carries no prev_close")
    try:
        prev_close = int(prev_close)
        limit = float(options.get("limit", fmt.limit_fraction))
    except ValueError as e:
        raise OrderFlowError(f"malformed day directive {line!r}: {e}") from e
    if prev_close <= 0:
        raise OrderFlowError(f"day directive {line!r}: prev_close must be positive")
    return day, prev_close, limit


def parse_row(raw: str, fmt: FormatSpec) -> OrderEvent:
    fields = [f.strip() for f in raw.split(fmt.delimiter)]
    if len(fields) not in (6, 7):
        raise RowError(f"expected 6 or 7 fields, got {len(fields)}")

    ts_raw, trader_id, code, price_raw, size_raw, order_id_raw = fields[:6]
    target_raw = fields[6] if len(fields) == 7 else ""

    try:
        timestamp = decode_timestamp(ts_raw, fmt.timestamp_encoding)
    except ValueError as e:
        raise RowError(f"bad timestamp: {e}") from e

    if not trader_id:
        raise RowError("empty trader_id")

    letter = fmt.code_map.get(code)
    if letter is None:
        raise RowError(f"unknown indicator {code!r}")
    action = _ACTIONS[letter]

    price = parse_price(price_raw)
    try:
        size = int(size_raw)
        order_id = int(order_id_raw)
    except ValueError as e:
        raise RowError(f"bad integer field: {e}") from e
    if order_id < 0:
        raise RowError("negative order_id")

    cancel_target = None
    if target_raw:
        try:
            cancel_target = int(target_raw)
        except ValueError as e:
            raise RowError(f"bad cancel_target: {e}") from e

    if action is Action.CANCEL:
        if cancel_target is None and fmt.cancel_mode is CancelMode.TARGET:
            raise RowError("missing cancel_target")
        if size < 0 or price < 0:
            raise RowError("negative cancel fields")
    else:
        if cancel_target is not None:
            raise RowError("cancel_target on a submission")
        if size <= 0:
            raise RowError("nonpositive size")
        if price <= 0:
            raise RowError("nonpositive price")

    return OrderEvent(
        order_id=order_id,
        timestamp=timestamp,
        trader_id=trader_id,
        action=action,
        price=price,
        size=size,
        cancel_target=cancel_target,
    )


def _undecodable(line: str) -> bool:
    try:
        line.encode("utf-8")
    except UnicodeEncodeError:
        return True
    return False


def _printable(line: str) -> str:
    return line.encode("utf-8", "surrogateescape").decode("utf-8", "replace")


def _close_day(builder: _DayBuilder, result: ParseResult) -> None:
    if builder.aborted is not None:
        result.failed_days.append(builder.aborted)
        for line, raw in builder.rows:
            result.rejects.append(RejectedRow(line=line, reason=f"day aborted: {builder.aborted.reason}", raw=raw))
        logger.warning(str(builder.aborted), extra={"date": str(builder.date)})
        return
    result.days.append(builder.build())


def parse_stream(raw_text: str | Iterable[str], fmt: FormatSpec | None = None) -> ParseResult:
    """Parse an order-flow stream into per-day event sequences plus a rejects report."""
    fmt = fmt or FormatSpec()
    lines = raw_text.splitlines() if isinstance(raw_text, str) else [line.rstrip("\r\n") for line in raw_text]
    result = ParseResult()
    tracer = trace.get_tracer(__name__)

    with tracer.start_as_current_span("parse_stream") as span:
        header_seen = False
        builder: Optional[_DayBuilder] = None
        seen_dates: set[date] = set()

        def start_day(day: date, prev_close: int, limit: float) -> _DayBuilder:
            if day in seen_dates:
                raise OrderFlowError(f"day {day} declared twice")
            seen_dates.add(day)
            return _DayBuilder(date=day, prev_close=prev_close, limit_fraction=limit)

        for line_no, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped:
                continue

            if not header_seen:
                if stripped != HEADER:
                    raise OrderFlowError(f"unparseable header {stripped[:40]!r}, expected {HEADER!r}")
                header_seen = True
                continue

            if stripped.startswith(DAY_DIRECTIVE + " "):
                if builder is not None:
                    _close_day(builder, result)
                builder = start_day(*_parse_day_directive(stripped, fmt))
                continue
            if stripped.startswith("#"):
                continue

            result.rows += 1

            if _undecodable(line):
                result.rejects.append(RejectedRow(line_no, "invalid utf-8", _printable(line)))
                continue

            if builder is None:
                if fmt.default_date is None or fmt.default_prev_close is None:
                    result.rejects.append(RejectedRow(line_no, "no trading day declared", line))
                    continue
                builder = start_day(fmt.default_date, fmt.default_prev_close, fmt.limit_fraction)

            if builder.aborted is not None:
                builder.rows.append((line_no, line))
                continue

            try:
                event = parse_row(stripped, fmt)
            except RowError as e:
                result.rejects.append(RejectedRow(line_no, str(e), line))
                continue

            if event.order_id in builder.order_ids:
                result.rejects.append(RejectedRow(line_no, "duplicate order_id", line))
                continue

            builder.rows.append((line_no, line))
            if event.timestamp < builder.last_timestamp:
                builder.aborted = DayAbortedError(builder.date, "non-monotone timestamps", line_no)
                continue

            builder.last_timestamp = event.timestamp
            builder.order_ids.add(event.order_id)
            builder.events.append(event)

        # a day file with no events is still a trading day
        no_day_yet = builder is None and header_seen and not seen_dates
        if no_day_yet and fmt.default_date is not None and fmt.default_prev_close is not None:
            builder = start_day(fmt.default_date, fmt.default_prev_close, fmt.limit_fraction)
        if builder is not None:
            _close_day(builder, result)

        span.set_attribute("rows", result.rows)
        span.set_attribute("rejects", result.rejected_count)
        span.add_event("parsed", attributes={"days": len(result.days)})

    if result.rejects:
        logger.info(
            f"Parsed {result.parsed_count} events, rejected {result.rejected_count} rows",
            extra={"rows": result.rows, "failed_days": len(result.failed_days)},
        )
    return result


def _reverse_code_map(fmt: FormatSpec) -> dict[Action, str]:
    reverse: dict[Action, str] = {}
    for code in sorted(fmt.code_map):
        reverse.setdefault(_ACTIONS[fmt.code_map[code]], code)
    missing = [a.value for a in Action if a not in reverse]
    if missing:
        raise OrderFlowError(f"code_map cannot encode actions {missing}")
    return reverse


def serialize_row(event: OrderEvent, fmt: FormatSpec, codes: dict[Action, str]) -> str:
    fields = [
        encode_timestamp(event.timestamp, fmt.timestamp_encoding),
        event.trader_id,
        codes[event.action],
        format_price(event.price),
        str(event.size),
        str(event.order_id),
    ]
    if event.cancel_target is not None:
        fields.append(str(event.cancel_target))
    return fmt.delimiter.join(fields)


def serialize_day(day: DayStream, fmt: FormatSpec | None = None, with_directive: bool = True) -> str:
    """Canonical text for one day; parse_stream(serialize_day(d)) reproduces d's events."""
    fmt = fmt or FormatSpec()
    codes = _reverse_code_map(fmt)
    lines = [HEADER]
    if with_directive:
        lines.append(
            f"{DAY_DIRECTIVE} {day.date:%Y%m%d} prev_close={day.prev_close} limit={day.limit_fraction!r}"
        )
    lines.extend(serialize_row(event, fmt, codes) for event in day.events)
    return "\n".join(lines) + "\n"
