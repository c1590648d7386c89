"""Replica ensembles of fitness-model networks and their comparison with the empirical days."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Sequence

import numpy as np
from opentelemetry import trace

from lobnet.common.core.exceptions import SimulationError
from lobnet.common.models.schemas import DegreeTypeStats, EnsembleReport, FitConfig
from lobnet.common.utils.rng import STREAM_FITNESS, derive_int_seed, derive_rng
from lobnet.fitnessmodel.model import FitnessAgent, simulate_day
from lobnet.tradenet.profiles import DEGREE_TYPES, DayDegreeFits, degree_samples, fit_degree_samples

logger = logging.getLogger(__name__)

# precision at which a model and real exponent count as tied
TIE_DECIMALS = 2

ReplicaOutcome = dict[str, Optional[tuple[float, bool]]]


def run_replica(
    sellers: Sequence[FitnessAgent],
    buyers: Sequence[FitnessAgent],
    config: FitConfig,
    seed: int,
    index: int,
) -> ReplicaOutcome:
    """Simulate one network and fit its three degree samples; None marks a failed fit."""
    network = simulate_day(sellers, buyers, derive_rng(seed, STREAM_FITNESS, index))
    replica_config = config.model_copy(update={"rng_seed": derive_int_seed(seed, STREAM_FITNESS, index, 1), "jobs": 1})
    fits = fit_degree_samples(degree_samples(network), replica_config).fits
    return {
        degree_type: None if fit is None else (fit.gamma, bool(fit.passes))
        for degree_type, fit in fits.items()
    }


def _replica_chunk(sellers, buyers, config, seed, indices) -> list[ReplicaOutcome]:
    return [run_replica(sellers, buyers, config, seed, i) for i in indices]


def _degree_stats(outcomes: list[ReplicaOutcome], degree_type: str, real: Optional[DayDegreeFits]) -> DegreeTypeStats:
    fitted = [o[degree_type] for o in outcomes if o[degree_type] is not None]
    gammas = np.array([g for g, _ in fitted])
    real_fit = real.fits.get(degree_type) if real is not None else None
    return DegreeTypeStats(
        p_model=sum(passes for _, passes in fitted) / len(outcomes) if outcomes else None,
        gamma_model_mean=float(gammas.mean()) if len(gammas) else None,
        gamma_model_std=float(gammas.std(ddof=1)) if len(gammas) > 1 else (0.0 if len(gammas) else None),
        gamma_real=real_fit.gamma if real_fit is not None else None,
        real_passes=real_fit.passes if real_fit is not None else None,
        fitted_replicas=len(fitted),
        failed_replicas=len(outcomes) - len(fitted),
    )


def run_ensemble(
    sellers: Sequence[FitnessAgent],
    buyers: Sequence[FitnessAgent],
    replicas: int,
    config: FitConfig | None = None,
    rng_seed: int = 0,
    day: Optional[date] = None,
    real: Optional[DayDegreeFits] = None,
    jobs: int = 1,
    pool_mode: str = "executed",
) -> EnsembleReport:
    """
    p_model is the share of replicas whose degree distribution passes the KS
    test; replicas whose fit fails count as not passing.
    """
    if replicas < 1:
        raise SimulationError(f"replicas must be >= 1, got {replicas}")
    config = config or FitConfig()
    tracer = trace.get_tracer(__name__)

    with tracer.start_as_current_span("run_ensemble") as span:
        span.set_attribute("replicas", replicas)
        span.set_attribute("date", str(day))
        if jobs <= 1 or replicas < 2 * jobs:
            outcomes = _replica_chunk(sellers, buyers, config, rng_seed, range(replicas))
        else:
            bounds = np.linspace(0, replicas, jobs * 4 + 1).astype(int)
            chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
            outcomes = []
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                n = len(chunks)
                for part in pool.map(_replica_chunk, [sellers] * n, [buyers] * n, [config] * n,
                                     [rng_seed] * n, chunks):
                    outcomes.extend(part)
        span.add_event("replicas_done", attributes={"count": len(outcomes)})

    stats = {t: _degree_stats(outcomes, t, real) for t in DEGREE_TYPES}
    report = EnsembleReport(date=day, replicas=replicas, seed=rng_seed, pool_mode=pool_mode, **stats)
    logger.info(
        f"Fitness ensemble {day}: p_model total={report.total.p_model}",
        extra={"date": str(day), "replicas": replicas},
    )
    return report


@dataclass
class ExponentComparison:
    degree_type: str
    rows: list[tuple[Optional[date], float, float, Optional[float]]] = field(default_factory=list)
    bias_fraction: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "degree_type": self.degree_type,
            "days": len(self.rows),
            "bias_fraction": self.bias_fraction,
            "rows": [
                {"date": d, "gamma_real": real, "gamma_model_mean": mean, "gamma_model_std": std}
                for d, real, mean, std in self.rows
            ],
        }


def compare_exponents(reports: Sequence[EnsembleReport], degree_type: str = "total") -> ExponentComparison:
    """
    Per-day (gamma_real, gamma_model mean, std) for days whose real fit passes
    and whose ensemble produced exponents, and the share of those days with
    gamma_model > gamma_real. Ties at reporting precision count one half.
    """
    comparison = ExponentComparison(degree_type)
    score = 0.0
    for report in reports:
        stats = report.by_type(degree_type)
        if stats.gamma_real is None or stats.gamma_model_mean is None or not stats.real_passes:
            continue
        comparison.rows.append((report.date, stats.gamma_real, stats.gamma_model_mean, stats.gamma_model_std))
        model = round(stats.gamma_model_mean, TIE_DECIMALS)
        real = round(stats.gamma_real, TIE_DECIMALS)
        score += 1.0 if model > real else 0.5 if model == real else 0.0
    if comparison.rows:
        comparison.bias_fraction = score / len(comparison.rows)
    return comparison
