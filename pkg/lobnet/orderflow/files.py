"""One-file-per-day storage: `YYYYMMDD.csv` plus `YYYYMMDD.meta.json` carrying prev_close."""
from __future__ import annotations

import json
import logging
from datetime import date, datetime
from pathlib import Path

from lobnet.common.core.exceptions import OrderFlowError
from lobnet.common.models.records import DayStream
from lobnet.common.models.schemas import FormatSpec
from lobnet.common.utils.artifacts import atomic_write_text, header_line
from lobnet.orderflow.parser import HEADER, ParseResult, parse_stream, serialize_day

logger = logging.getLogger(__name__)

META_SUFFIX = ".meta.json"


def day_file_name(day: date) -> str:
    return f"{day:%Y%m%d}.csv"


def meta_path_for(path: Path) -> Path:
    return path.with_name(path.stem + META_SUFFIX)


def read_meta(path: Path) -> dict:
    meta_path = meta_path_for(path)
    if not meta_path.exists():
        return {}
    try:
        with open(meta_path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise OrderFlowError(f"unreadable metadata {meta_path}: {e}") from e


def load_day_file(path: Path, fmt: FormatSpec | None = None) -> ParseResult:
    """
    Parse one day file. The date comes from the metadata (or the file name);
    prev_close and limit_fraction come from the metadata unless the stream
    carries its own `#day` directive.
    """
    path = Path(path)
    fmt = fmt or FormatSpec()
    meta = read_meta(path)

    overrides: dict = {}
    raw_date = meta.get("date") or path.stem
    try:
        overrides["default_date"] = date.fromisoformat(raw_date) if "-" in raw_date \
            else datetime.strptime(raw_date, "%Y%m%d").date()
    except ValueError:
        logger.debug(f"{path.name}: no date in metadata or file name")
    if "prev_close" in meta:
        overrides["default_prev_close"] = int(meta["prev_close"])
    if "limit_fraction" in meta:
        overrides["limit_fraction"] = float(meta["limit_fraction"])

    fmt = fmt.model_copy(update=overrides)
    # undecodable bytes survive as surrogates and the parser rejects their rows
    with open(path, encoding="utf-8", errors="surrogateescape") as handle:
        result = parse_stream(handle, fmt)
    logger.info(
        f"Loaded {path.name}: {result.parsed_count} events",
        extra={"rejected": result.rejected_count, "days": len(result.days)},
    )
    return result


def load_day_files(paths: list[Path], fmt: FormatSpec | None = None) -> ParseResult:
    """Parse several files; days come back sorted by date."""
    merged = ParseResult()
    for path in sorted(expand_inputs(paths)):
        result = load_day_file(path, fmt)
        merged.days.extend(result.days)
        merged.rejects.extend(result.rejects)
        merged.failed_days.extend(result.failed_days)
        merged.rows += result.rows
    merged.days.sort(key=lambda d: d.date)
    dates = [d.date for d in merged.days]
    if len(dates) != len(set(dates)):
        raise OrderFlowError("the same trading day appears in more than one input")
    return merged


def expand_inputs(paths: list[Path]) -> list[Path]:
    """Directories expand to their `*.csv` day files."""
    files: list[Path] = []
    for path in map(Path, paths):
        if path.is_dir():
            files.extend(p for p in sorted(path.glob("*.csv")) if p.stem.isdigit())
        else:
            files.append(path)
    return files


def write_day_files(
    day: DayStream,
    directory: Path,
    fmt: FormatSpec | None = None,
    digest: str | None = None,
) -> Path:
    """Write `YYYYMMDD.csv` and its metadata; a manifest digest goes in as a comment under the header."""
    directory = Path(directory)
    path = directory / day_file_name(day.date)
    text = serialize_day(day, fmt, with_directive=False)
    if digest is not None:
        text = text.replace(HEADER + "\n", f"{HEADER}\n{header_line(digest)}\n", 1)
    atomic_write_text(path, text)
    meta = {
        "date": day.date.isoformat(),
        "prev_close": day.prev_close,
        "limit_fraction": day.limit_fraction,
    }
    if digest is not None:
        meta["_header"] = header_line(digest)
    atomic_write_text(meta_path_for(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path
