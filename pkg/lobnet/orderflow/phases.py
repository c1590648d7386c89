"""Trading-session calendar of the 2003 Shenzhen rules, in centiseconds since midnight."""
from bisect import bisect_right

from lobnet.common.core.exceptions import OrderFlowError
from lobnet.common.models.records import SessionPhase
from lobnet.common.models.schemas import TimestampEncoding

CENTISECONDS_PER_DAY = 8_640_000


def hms(hours: int, minutes: int = 0, seconds: int = 0, centis: int = 0) -> int:
    return ((hours * 60 + minutes) * 60 + seconds) * 100 + centis


OPEN_AUCTION_START = hms(9, 15)
FROZEN_CANCEL_START = hms(9, 20)
AUCTION_TIME = hms(9, 25)
CONTINUOUS_START = hms(9, 30)
LUNCH_START = hms(11, 30)
AFTERNOON_START = hms(13, 0)
MARKET_CLOSE = hms(15, 0)

# [start, next start) for each phase, in calendar order
_PHASE_STARTS = (
    (0, SessionPhase.CLOSED),
    (OPEN_AUCTION_START, SessionPhase.OPEN_CALL_AUCTION),
    (AUCTION_TIME, SessionPhase.COOL_PERIOD),
    (CONTINUOUS_START, SessionPhase.MORNING_CONTINUOUS),
    (LUNCH_START, SessionPhase.LUNCH),
    (AFTERNOON_START, SessionPhase.AFTERNOON_CONTINUOUS),
    (MARKET_CLOSE, SessionPhase.CLOSED),
)
_STARTS = [start for start, _ in _PHASE_STARTS]


def classify_phase(timestamp: int) -> SessionPhase:
    if not 0 <= timestamp < CENTISECONDS_PER_DAY:
        raise OrderFlowError(f"timestamp {timestamp} outside [0, {CENTISECONDS_PER_DAY})")
    return _PHASE_STARTS[bisect_right(_STARTS, timestamp) - 1][1]


def phase_intervals(phase: SessionPhase) -> list[tuple[int, int]]:
    """Half-open intervals covered by `phase` (Closed has two)."""
    bounds = _STARTS + [CENTISECONDS_PER_DAY]
    return [
        (bounds[i], bounds[i + 1])
        for i, (_, p) in enumerate(_PHASE_STARTS)
        if p is phase
    ]


def in_frozen_cancel_window(timestamp: int) -> bool:
    """Cancels in [9:20, 9:25) wait until the opening auction has run."""
    return FROZEN_CANCEL_START <= timestamp < AUCTION_TIME


def format_timestamp(timestamp: int) -> str:
    seconds, centis = divmod(timestamp, 100)
    minutes, seconds = divmod(seconds, 60)
    hours, minutes = divmod(minutes, 60)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d}.{centis:02d}"


def decode_timestamp(raw: str, encoding: TimestampEncoding) -> int:
    value = int(raw)
    if value < 0:
        raise ValueError(f"negative timestamp {raw!r}")
    if encoding is TimestampEncoding.CENTISECONDS:
        if value >= CENTISECONDS_PER_DAY:
            raise ValueError(f"timestamp {raw!r} past midnight")
        return value
    hours, rest = divmod(value, 1_000_000)
    minutes, rest = divmod(rest, 10_000)
    seconds, centis = divmod(rest, 100)
    if hours >= 24 or minutes >= 60 or seconds >= 60:
        raise ValueError(f"packed timestamp {raw!r} is not HMMSSCC")
    return hms(hours, minutes, seconds, centis)


def encode_timestamp(timestamp: int, encoding: TimestampEncoding) -> str:
    if encoding is TimestampEncoding.CENTISECONDS:
        return str(timestamp)
    seconds, centis = divmod(timestamp, 100)
    minutes, seconds = divmod(seconds, 60)
    hours, minutes = divmod(minutes, 60)
    return str(hours * 1_000_000 + minutes * 10_000 + seconds * 100 + centis)
