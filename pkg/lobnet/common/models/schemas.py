from __future__ import annotations

from datetime import date as Date
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from lobnet.common.core.config import settings


PIPELINE_STAGES = ("synth", "replay", "stats", "network", "fit", "profiles", "fitness")
ENTRY_STAGES = ("synth", "replay")


class Discreteness(str, Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


class TimestampEncoding(str, Enum):
    PACKED = "packed"  # HMMSSCC, e.g. 9342152 == 09:34:21.52
    CENTISECONDS = "centiseconds"


class CancelMode(str, Enum):
    TARGET = "target"
    OLDEST_OPEN = "oldest_open"


class ScalingRangeClass(str, Enum):
    SR_GE_1 = "sr_ge_1"
    SR_LT_1 = "sr_lt_1"


class FormatSpec(BaseModel):
    """How a canonical order-flow stream is laid out."""
    model_config = ConfigDict(frozen=True)

    timestamp_encoding: TimestampEncoding = TimestampEncoding.PACKED
    delimiter: str = Field(default=",", min_length=1, max_length=1)
    code_map: dict[str, str] = Field(
        default_factory=lambda: {"B": "B", "S": "S", "C": "C"},
        description="Raw indicator code -> canonical action letter (B/S/C)",
    )
    cancel_mode: CancelMode = CancelMode.TARGET
    default_date: Optional[Date] = None
    default_prev_close: Optional[int] = Field(default=None, gt=0)
    limit_fraction: float = Field(default_factory=lambda: settings.limit_fraction, gt=0, lt=1)

    @field_validator("code_map")
    @classmethod
    def validate_code_map(cls, v: dict[str, str]) -> dict[str, str]:
        bad = {code: action for code, action in v.items() if action not in ("B", "S", "C")}
        if bad:
            raise ValueError(f"code_map targets must be B, S or C; got {bad}")
        return v


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    discreteness: Discreteness = Discreteness.DISCRETE
    significance: float = Field(default_factory=lambda: settings.significance, gt=0, lt=1)
    bootstrap_replicas: int = Field(default_factory=lambda: settings.bootstrap_replicas, ge=100)
    min_tail: int = Field(default_factory=lambda: settings.min_tail_points, ge=2)
    min_sample: int = Field(default_factory=lambda: settings.min_sample_points, ge=2)
    max_candidates: int = Field(default_factory=lambda: settings.max_xmin_candidates, ge=1)
    rng_seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    jobs: int = Field(default=1, ge=1, description="Worker processes for bootstrap replicas")


class PowerLawFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    xmin: float = Field(..., gt=0)
    alpha: float = Field(..., gt=1, description="PDF exponent")
    gamma: float = Field(..., description="CDF exponent, alpha - 1")
    ks_distance: float = Field(..., ge=0, le=1)
    p_value: Optional[float] = Field(default=None, ge=0, le=1)
    n: int
    n_tail: int
    max_value: float
    scaling_range: float
    sr_class: ScalingRangeClass
    passes: Optional[bool] = None
    discreteness: Discreteness = Discreteness.DISCRETE
    alpha_stderr: float = 0.0

    @model_validator(mode="after")
    def check_gamma(self) -> "PowerLawFit":
        if abs(self.gamma - (self.alpha - 1.0)) > 1e-12:
            raise ValueError("gamma must equal alpha - 1")
        return self

    @property
    def levy_regime(self) -> bool:
        return self.gamma < 2.0

    def report(self) -> dict:
        """User-facing fit report: gamma is the headline exponent."""
        return {
            "xmin": self.xmin,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "ks": self.ks_distance,
            "p": self.p_value,
            "n_tail": self.n_tail,
            "sr": self.scaling_range,
            "passes": self.passes,
        }


class GenConfig(BaseModel):
    """Synthetic order-flow day generator settings."""
    model_config = ConfigDict(frozen=True)

    date: Date = Date(2003, 1, 2)
    traders: int = Field(default=2000, ge=1)
    events: int = Field(default=20000, ge=0)
    size_exponent: float = Field(default=2.7, gt=1, description="PDF exponent of order size in lots")
    size_xmin_lots: int = Field(default=1, ge=1)
    max_lots: int = Field(default=100_000, ge=1)
    lot: int = Field(default_factory=lambda: settings.lot_size, ge=1)
    prev_close: int = Field(default=1000, gt=0, description="ticks")
    limit_fraction: float = Field(default_factory=lambda: settings.limit_fraction, gt=0, lt=1)
    marketable_prob: float = Field(default=0.3, ge=0, le=1)
    cancel_prob: float = Field(default=0.15, ge=0, le=1)
    max_offset_ticks: int = Field(default=10, ge=1)
    phase_allocation: dict[str, float] = Field(default_factory=lambda: {
        "OpenCallAuction": 0.05,
        "CoolPeriod": 0.01,
        "MorningContinuous": 0.50,
        "AfternoonContinuous": 0.44,
    })
    rng_seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)

    @field_validator("phase_allocation")
    @classmethod
    def validate_allocation(cls, v: dict[str, float]) -> dict[str, float]:
        allowed = {"OpenCallAuction", "CoolPeriod", "MorningContinuous", "AfternoonContinuous"}
        unknown = set(v) - allowed
        if unknown:
            raise ValueError(f"unknown phases in phase_allocation: {sorted(unknown)}")
        if any(w < 0 for w in v.values()) or sum(v.values()) <= 0:
            raise ValueError("phase_allocation weights must be non-negative with a positive sum")
        return v

    @model_validator(mode="after")
    def check_sizes(self) -> "GenConfig":
        if self.size_xmin_lots > self.max_lots:
            raise ValueError("size_xmin_lots must not exceed max_lots")
        return self


class DailyMarketStats(BaseModel):
    date: Date
    close: Optional[int]
    volatility: float = Field(..., ge=0)
    total_volume: int = Field(..., ge=0)
    trade_count: int = Field(..., ge=0)
    p_max: Optional[int] = None
    p_min: Optional[int] = None


class NetworkSizeMetrics(BaseModel):
    date: Optional[Date] = None
    N: int
    N_ask: int
    N_bid: int
    N_e: int
    r_LC: float
    r_2LC: float
    mean_k_ask: float
    mean_k_bid: float
    mean_k: float
    total_weight: int
    self_loop_weight: int = 0
    mean_s_ask: Optional[float] = None
    mean_s_bid: Optional[float] = None


class DegreeTypeStats(BaseModel):
    """Ensemble statistics of one degree type (ask, bid or total)."""
    p_model: Optional[float] = Field(default=None, ge=0, le=1)
    gamma_model_mean: Optional[float] = None
    gamma_model_std: Optional[float] = None
    gamma_real: Optional[float] = None
    real_passes: Optional[bool] = None
    fitted_replicas: int = 0
    failed_replicas: int = 0


class EnsembleReport(BaseModel):
    date: Optional[Date] = None
    replicas: int
    seed: int
    pool_mode: str
    ask: DegreeTypeStats
    bid: DegreeTypeStats
    total: DegreeTypeStats

    def by_type(self, degree_type: str) -> DegreeTypeStats:
        return {"ask": self.ask, "bid": self.bid, "total": self.total}[degree_type]


class RunManifest(BaseModel):
    """Key-value manifest describing one pipeline run."""
    model_config = ConfigDict(extra="forbid")

    inputs: list[Path] = Field(default_factory=list)
    ledgers: Optional[Path] = None
    output: Path = Path("lobnet-out")
    stages: list[str] = Field(default_factory=lambda: list(PIPELINE_STAGES))
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    jobs: int = Field(default_factory=lambda: settings.default_jobs, ge=1)
    significance: float = Field(default_factory=lambda: settings.significance, gt=0, lt=1)
    replicas: int = Field(default_factory=lambda: settings.fitness_replicas, ge=1)
    fit: FitConfig = Field(default_factory=FitConfig)
    gen: GenConfig = Field(default_factory=GenConfig)
    days: int = Field(default=1, ge=0)
    reference: Optional[Path] = None

    @field_validator("stages")
    @classmethod
    def validate_stages(cls, v: list[str]) -> list[str]:
        unknown = [s for s in v if s not in PIPELINE_STAGES]
        if unknown:
            raise ValueError(f"unknown stages: {unknown}")
        ordered = sorted(set(v), key=PIPELINE_STAGES.index)
        if not ordered:
            return ordered
        # a prefix of the pipeline, entered at synth or, for recorded order flow, at replay
        if ordered[0] not in ENTRY_STAGES:
            raise ValueError(f"stages must start at one of {list(ENTRY_STAGES)}, got {v}")
        start = PIPELINE_STAGES.index(ordered[0])
        if ordered != list(PIPELINE_STAGES[start:start + len(ordered)]):
            raise ValueError(f"stages must be a gap-free prefix of {list(PIPELINE_STAGES)}, got {v}")
        return ordered

    @model_validator(mode="after")
    def check_paths(self) -> "RunManifest":
        missing = [str(p) for p in self.inputs if not p.exists()]
        if missing:
            raise ValueError(f"input paths do not exist: {missing}")
        if self.reference is not None and not self.reference.exists():
            raise ValueError(f"reference series does not exist: {self.reference}")
        return self


