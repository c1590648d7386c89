"""Full tail calibration: lower bound, exponent, goodness of fit and scaling range."""
from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from lobnet.common.models.schemas import FitConfig, PowerLawFit, ScalingRangeClass
from lobnet.plfit.bootstrap import gof_pvalue
from lobnet.plfit.estimators import alpha_stderr, as_sample, select_xmin

logger = logging.getLogger(__name__)


def scaling_range(max_value: float, xmin: float) -> float:
    return float(np.log10(max_value / xmin))


def classify_scaling_range(fit: PowerLawFit | float, sample: Sequence[float] | None = None) -> ScalingRangeClass:
    """
    sr = log10(max(sample) / xmin), classed against 1. `fit` may be a fit
    (its own max is used when no sample is given) or a bare xmin.
    """
    if isinstance(fit, PowerLawFit):
        xmin = fit.xmin
        top = fit.max_value if sample is None else float(np.max(sample))
    else:
        if sample is None:
            raise ValueError("a bare xmin needs the sample")
        xmin, top = float(fit), float(np.max(sample))
    sr = scaling_range(top, xmin)
    return ScalingRangeClass.SR_GE_1 if sr >= 1.0 else ScalingRangeClass.SR_LT_1


def fit_powerlaw(sample: Sequence[float], config: FitConfig | None = None, with_pvalue: bool = True) -> PowerLawFit:
    """Select xmin, estimate alpha and, unless disabled, bootstrap the p-value."""
    config = config or FitConfig()
    x = as_sample(sample)
    choice = select_xmin(x, config)
    p_value = gof_pvalue(x, choice, config) if with_pvalue else None

    top = float(x[-1])
    sr = scaling_range(top, choice.xmin)
    fit = PowerLawFit(
        xmin=choice.xmin,
        alpha=choice.alpha,
        gamma=choice.alpha - 1.0,
        ks_distance=min(choice.ks_distance, 1.0),
        p_value=p_value,
        n=len(x),
        n_tail=choice.n_tail,
        max_value=top,
        scaling_range=sr,
        sr_class=ScalingRangeClass.SR_GE_1 if sr >= 1.0 else ScalingRangeClass.SR_LT_1,
        passes=None if p_value is None else p_value >= config.significance,
        discreteness=config.discreteness,
        alpha_stderr=alpha_stderr(choice.alpha, choice.n_tail),
    )
    logger.debug(
        f"Fitted tail: xmin={fit.xmin:g} gamma={fit.gamma:.3f} ks={fit.ks_distance:.4f} p={fit.p_value}",
        extra={"n": fit.n, "n_tail": fit.n_tail},
    )
    return fit


def levy_regime(fit: PowerLawFit) -> bool:
    """CDF exponent below 2: the tail's variance diverges."""
    return fit.levy_regime


def ccdf(sample: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values and P(X >= x), for cumulative-distribution plots."""
    x = as_sample(sample)
    if len(x) == 0:
        return np.empty(0), np.empty(0)
    distinct, counts = np.unique(x, return_counts=True)
    at_least = len(x) - (np.cumsum(counts) - counts)
    return distinct, at_least / len(x)


def summarize_fits(fits: Sequence[Optional[PowerLawFit]]) -> dict:
    """Batch summary across days: exponent mean and std, pass rate, scaling-range split."""
    fitted = [f for f in fits if f is not None]
    gammas = np.array([f.gamma for f in fitted])
    tested = [f for f in fitted if f.passes is not None]
    return {
        "days": len(fits),
        "fitted": len(fitted),
        "failed": len(fits) - len(fitted),
        "gamma_mean": float(gammas.mean()) if len(gammas) else None,
        "gamma_std": float(gammas.std(ddof=1)) if len(gammas) > 1 else None,
        "pass_rate": sum(f.passes for f in tested) / len(tested) if tested else None,
        "levy_fraction": float(np.mean(gammas < 2.0)) if len(gammas) else None,
        "sr_ge_1": sum(f.sr_class is ScalingRangeClass.SR_GE_1 for f in fitted),
        "sr_lt_1": sum(f.sr_class is ScalingRangeClass.SR_LT_1 for f in fitted),
    }
