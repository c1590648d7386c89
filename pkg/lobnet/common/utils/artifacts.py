"""
Artifact writers: every file carries a header naming the tool version and the
manifest hash, and every write goes through a temp file + rename.
"""
import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from pydantic import BaseModel

from lobnet import __version__

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# lobnet"


def _json_default(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (date, Path)):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, default=_json_default, sort_keys=True, separators=(",", ":"))


def manifest_hash(manifest: BaseModel | Mapping[str, Any]) -> str:
    """sha256 over the canonical JSON form of the manifest."""
    if isinstance(manifest, BaseModel):
        manifest = manifest.model_dump(mode="json")
    return hashlib.sha256(canonical_json(manifest).encode("utf-8")).hexdigest()


def header_line(digest: str) -> str:
    return f"{HEADER_PREFIX} {__version__} manifest={digest[:16]}"


def atomic_write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug(f"Wrote {path}")
    return path


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], digest: str) -> Path:
    buffer = io.StringIO()
    buffer.write(header_line(digest) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return atomic_write_text(path, buffer.getvalue())


def write_json(path: Path, payload: Mapping[str, Any] | BaseModel | list, digest: str) -> Path:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    document = {"_header": header_line(digest), "data": payload}
    text = json.dumps(document, default=_json_default, indent=2, sort_keys=True) + "\n"
    return atomic_write_text(path, text)


def read_csv_rows(path: Path) -> list[dict[str, str]]:
    """Read a CSV artifact, skipping the header comment line(s)."""
    with open(path, encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def read_json(path: Path) -> Any:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)["data"]
