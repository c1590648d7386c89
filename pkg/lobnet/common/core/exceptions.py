"""Error hierarchy shared by every lobnet stage."""


class LobnetError(Exception):
    """Base class for all lobnet failures."""


class ConfigError(LobnetError):
    """Raised when a manifest, generator config or flag combination is invalid."""


class OrderFlowError(LobnetError, ValueError):
    """Raised when an order-flow stream cannot be parsed at all (e.g. bad header)."""


class DayAbortedError(OrderFlowError):
    """Raised when one trading day has to be discarded (non-monotone timestamps)."""

    def __init__(self, date, reason: str, line: int | None = None):
        self.date = date
        self.reason = reason
        self.line = line
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"day {date} aborted{where}: {reason}")


class EngineError(LobnetError):
    """Raised when the matching engine receives events it cannot replay."""


class FitError(LobnetError, ValueError):
    """Raised when a power-law fit cannot be produced."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class StatsError(LobnetError, ValueError):
    """Raised when a statistic's preconditions are not met."""


class SimulationError(LobnetError):
    """Raised when the fitness model cannot run (e.g. an empty pool)."""
