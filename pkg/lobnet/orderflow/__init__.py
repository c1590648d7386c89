from lobnet.orderflow.files import load_day_file, load_day_files, write_day_files
from lobnet.orderflow.parser import ParseResult, parse_stream, serialize_day
from lobnet.orderflow.phases import classify_phase
from lobnet.orderflow.validation import Invalid, Valid, validate_day, validate_event

__all__ = [
    "ParseResult",
    "parse_stream",
    "serialize_day",
    "load_day_file",
    "load_day_files",
    "write_day_files",
    "classify_phase",
    "Valid",
    "Invalid",
    "validate_event",
    "validate_day",
]
