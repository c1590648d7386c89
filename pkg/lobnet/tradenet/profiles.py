"""Ensemble profiles over many daily networks: neighbor degrees, size-degree scaling, degree fits."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from lobnet.common.core.config import settings
from lobnet.common.core.exceptions import FitError, StatsError
from lobnet.common.models.records import DegreeRecord
from lobnet.common.models.schemas import FitConfig, PowerLawFit
from lobnet.plfit.fitting import fit_powerlaw, summarize_fits
from lobnet.tradenet.network import TradingNetwork, degrees

logger = logging.getLogger(__name__)

DEGREE_TYPES = ("ask", "bid", "total")


class Direction(str, Enum):
    ASK_SIDE = "ask"
    BID_SIDE = "bid"


@dataclass(frozen=True)
class KnnBin:
    mean_k: float
    mean_knn: float
    count: int


def _log_bin_index(values: np.ndarray, bins: int) -> np.ndarray:
    """Equal divisions of [ln min, ln max]; the maximum falls in the last bin."""
    logs = np.log(values)
    low, high = logs.min(), logs.max()
    if high == low:
        return np.zeros(len(values), dtype=int)
    index = np.floor((logs - low) / ((high - low) / bins)).astype(int)
    return np.clip(index, 0, bins - 1)


def node_knn(net: TradingNetwork, direction: Direction) -> list[tuple[int, float]]:
    """
    (k, k_nn) per node on one side. Ask side: sellers, whose neighbors are the
    buyers they sold to, averaged by those buyers' bid-degrees. Bid side is
    the mirror image.
    """
    points = []
    for trader in net.nodes():
        if direction is Direction.ASK_SIDE:
            neighbors = net.buyers_of(trader)
            neighbor_degree = net.k_bid
        else:
            neighbors = net.sellers_of(trader)
            neighbor_degree = net.k_ask
        if not neighbors:
            continue
        k = len(neighbors)
        points.append((k, sum(neighbor_degree(j) for j in neighbors) / k))
    return points


def knn_profile(
    networks: Sequence[TradingNetwork],
    direction: Direction,
    bins: int | None = None,
) -> list[KnnBin]:
    """Pool nodes of all networks, bin by ln k and average k and k_nn per bin; empty bins are omitted."""
    if not networks:
        raise StatsError("knn profile needs at least one network")
    bins = bins or settings.knn_bins
    points = [p for net in networks for p in node_knn(net, direction)]
    if not points:
        return []
    k = np.array([p[0] for p in points], dtype=float)
    knn = np.array([p[1] for p in points], dtype=float)
    index = _log_bin_index(k, bins)

    profile = []
    for b in range(bins):
        mask = index == b
        if mask.any():
            profile.append(KnnBin(mean_k=float(k[mask].mean()), mean_knn=float(knn[mask].mean()), count=int(mask.sum())))
    return profile


@dataclass(frozen=True)
class SizeDegreeBin:
    mean_s: float
    std_s: float
    mean_k: float
    std_k: float
    count: int


@dataclass
class SizeDegreeProfile:
    side: str
    bins: list[SizeDegreeBin]
    beta: Optional[float]
    beta_stderr: Optional[float]
    fit_points: int
    fit_threshold: float


def degree_size_correlation(
    records: Iterable[DegreeRecord],
    side: str,
    bins: int | None = None,
    fit_threshold: float | None = None,
) -> SizeDegreeProfile:
    """
    Log-binned means and deviations of order size s and degree k on one side,
    and the least-squares slope beta of ln k against ln s over the bins whose
    mean size exceeds the threshold.
    """
    bins = bins or settings.size_degree_bins
    fit_threshold = settings.size_degree_threshold if fit_threshold is None else fit_threshold
    if side not in ("ask", "bid"):
        raise StatsError(f"side must be 'ask' or 'bid', got {side!r}")

    pairs = [
        (r.s_ask, r.k_ask) if side == "ask" else (r.s_bid, r.k_bid)
        for r in records
    ]
    pairs = [(s, k) for s, k in pairs if s > 0]
    if not pairs:
        return SizeDegreeProfile(side, [], None, None, 0, fit_threshold)

    s = np.array([p[0] for p in pairs], dtype=float)
    k = np.array([p[1] for p in pairs], dtype=float)
    index = _log_bin_index(s, bins)

    profile = []
    for b in range(bins):
        mask = index == b
        if mask.any():
            profile.append(SizeDegreeBin(
                mean_s=float(s[mask].mean()),
                std_s=float(s[mask].std()),
                mean_k=float(k[mask].mean()),
                std_k=float(k[mask].std()),
                count=int(mask.sum()),
            ))

    usable = [b for b in profile if b.mean_s > fit_threshold and b.mean_k > 0]
    beta = beta_stderr = None
    if len(usable) >= 2:
        fit = stats.linregress(np.log([b.mean_s for b in usable]), np.log([b.mean_k for b in usable]))
        beta, beta_stderr = float(fit.slope), float(fit.stderr)
    else:
        logger.info(f"Size-degree fit on the {side} side has {len(usable)} usable bins; beta undefined")
    return SizeDegreeProfile(side, profile, beta, beta_stderr, len(usable), fit_threshold)


def degree_samples(net: TradingNetwork) -> dict[str, list[int]]:
    """Positive k_ask, k_bid and k values of one network."""
    records = degrees(net)
    return {
        "ask": [r.k_ask for r in records if r.k_ask > 0],
        "bid": [r.k_bid for r in records if r.k_bid > 0],
        "total": [r.k for r in records if r.k > 0],
    }


@dataclass
class DayDegreeFits:
    date: Optional[date]
    fits: dict[str, Optional[PowerLawFit]]
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return bool(self.errors)


def fit_degree_samples(samples: dict[str, list[int]], config: FitConfig, day: Optional[date] = None) -> DayDegreeFits:
    fits: dict[str, Optional[PowerLawFit]] = {}
    errors: dict[str, str] = {}
    for degree_type in DEGREE_TYPES:
        try:
            fits[degree_type] = fit_powerlaw(samples[degree_type], config)
        except FitError as e:
            fits[degree_type] = None
            errors[degree_type] = e.reason
    if errors:
        logger.info(f"{day}: degree fits flagged {errors}", extra={"date": str(day)})
    return DayDegreeFits(date=day, fits=fits, errors=errors)


def degree_distribution_fits(
    networks: Sequence[TradingNetwork],
    config: FitConfig | None = None,
) -> tuple[list[DayDegreeFits], dict[str, dict]]:
    """Per-day k_ask, k_bid and k fits, plus the batch summary per degree type."""
    config = config or FitConfig()
    per_day = [fit_degree_samples(degree_samples(net), config, net.date) for net in networks]
    summary = {
        degree_type: summarize_fits([day.fits[degree_type] for day in per_day])
        for degree_type in DEGREE_TYPES
    }
    return per_day, summary
