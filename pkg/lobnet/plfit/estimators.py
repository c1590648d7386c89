"""
Maximum-likelihood exponents, KS distances and lower-bound selection for
power-law tails p(x) ~ x^-alpha, x >= xmin.

Discrete tails are normalized by the Hurwitz zeta function
(scipy.special.zeta(alpha, xmin)); continuous ones in closed form.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from lobnet.common.core.config import settings
from lobnet.common.core.exceptions import FitError
from lobnet.common.models.schemas import Discreteness, FitConfig

logger = logging.getLogger(__name__)

REASON_MIN_TAIL = "minimum tail size"
REASON_DEGENERATE = "degenerate sample"

# bracket of the discrete exponent search
ALPHA_LOWER = 1.0 + 1e-6
ALPHA_UPPER = 6.0
ALPHA_XTOL = 1e-4


def as_sample(sample: Sequence[float]) -> np.ndarray:
    """Sorted float array of the strictly positive values."""
    x = np.asarray(sample, dtype=float)
    x = x[np.isfinite(x) & (x > 0)]
    return np.sort(x)


def _discrete_alpha(n: int, log_sum: float, xmin: float) -> float:
    def neg_log_likelihood(alpha: float) -> float:
        return n * np.log(zeta(alpha, xmin)) + alpha * log_sum

    result = minimize_scalar(
        neg_log_likelihood,
        bounds=(ALPHA_LOWER, ALPHA_UPPER),
        method="bounded",
        options={"xatol": ALPHA_XTOL},
    )
    return float(result.x)


def _continuous_alpha(n: int, log_sum: float, xmin: float) -> float:
    denominator = log_sum - n * np.log(xmin)
    if denominator <= 0:
        raise FitError(REASON_DEGENERATE, f"all tail values equal xmin={xmin}")
    return 1.0 + n / denominator


def mle_alpha(
    sample: Sequence[float],
    xmin: float,
    discreteness: Discreteness = Discreteness.DISCRETE,
    min_tail: int | None = None,
) -> float:
    """PDF exponent of the tail x >= xmin by maximum likelihood."""
    min_tail = settings.min_tail_points if min_tail is None else min_tail
    x = np.asarray(sample, dtype=float)
    tail = x[x >= xmin]
    if len(tail) < min_tail:
        raise FitError(REASON_MIN_TAIL, f"{len(tail)} points >= {xmin}, need {min_tail}")
    if np.all(tail == tail[0]):
        raise FitError(REASON_DEGENERATE, f"all {len(tail)} tail values equal {tail[0]}")
    log_sum = float(np.log(tail).sum())
    if discreteness is Discreteness.DISCRETE:
        return _discrete_alpha(len(tail), log_sum, xmin)
    return _continuous_alpha(len(tail), log_sum, xmin)


def alpha_stderr(alpha: float, n_tail: int) -> float:
    return (alpha - 1.0) / np.sqrt(n_tail)


def model_cdf(values: np.ndarray, alpha: float, xmin: float, discreteness: Discreteness) -> np.ndarray:
    """P(X <= v) of the fitted tail for v >= xmin (0 below xmin)."""
    values = np.asarray(values, dtype=float)
    if discreteness is Discreteness.DISCRETE:
        cdf = 1.0 - zeta(alpha, np.floor(values) + 1.0) / zeta(alpha, xmin)
    else:
        cdf = 1.0 - (np.maximum(values, xmin) / xmin) ** (1.0 - alpha)
    return np.where(values < xmin, 0.0, cdf)


def _sup_distance(
    distinct: np.ndarray,
    emp_right: np.ndarray,
    emp_left: np.ndarray,
    alpha: float,
    xmin: float,
    discreteness: Discreteness,
) -> float:
    """
    Sup-norm between the empirical and model CDFs. Both are monotone and the
    empirical one is a step function, so the supremum sits at an observed
    value or just before one.
    """
    at = model_cdf(distinct, alpha, xmin, discreteness)
    if discreteness is Discreteness.DISCRETE:
        before = model_cdf(distinct - 1.0, alpha, xmin, discreteness)
    else:
        before = at
    return float(max(np.max(np.abs(emp_right - at)), np.max(np.abs(emp_left - before))))


def ks_distance(
    sample: Sequence[float],
    alpha: float,
    xmin: float,
    discreteness: Discreteness = Discreteness.DISCRETE,
) -> float:
    """KS distance between the tail x >= xmin and the fitted power law."""
    x = np.sort(np.asarray(sample, dtype=float))
    tail = x[x >= xmin]
    if len(tail) == 0:
        raise FitError(REASON_MIN_TAIL, f"no points >= {xmin}")
    distinct, counts = np.unique(tail, return_counts=True)
    cum = np.cumsum(counts)
    n = float(len(tail))
    return _sup_distance(distinct, cum / n, (cum - counts) / n, alpha, xmin, discreteness)


@dataclass(frozen=True)
class XminChoice:
    xmin: float
    alpha: float
    ks_distance: float
    n_tail: int
    candidates: int


class TailIndex:
    """
    Sorted sample with per-distinct-value suffix statistics, so every
    candidate xmin costs one exponent search plus one vectorized KS pass.
    """

    def __init__(self, sample: Sequence[float]):
        self.values = as_sample(sample)
        self.n = len(self.values)
        self.distinct, self.counts = np.unique(self.values, return_counts=True)
        self.cum = np.cumsum(self.counts)
        self.before = self.cum - self.counts  # points strictly below each distinct value
        log_x = np.log(self.distinct) * self.counts
        self.suffix_log = np.cumsum(log_x[::-1])[::-1]

    def tail_size(self, j: int) -> int:
        return int(self.n - self.before[j])

    def candidate_indices(self, min_tail: int, max_candidates: int) -> np.ndarray:
        """Distinct-value indices that leave >= min_tail points and a non-constant tail."""
        tail_sizes = self.n - self.before
        valid = np.flatnonzero(tail_sizes[:-1] >= min_tail)
        if len(valid) > max_candidates:
            picks = np.unique(np.round(np.linspace(0, len(valid) - 1, max_candidates)).astype(int))
            valid = valid[picks]
        return valid

    def fit_at(self, j: int, discreteness: Discreteness) -> tuple[float, float]:
        """(alpha, ks) for xmin = distinct[j]."""
        xmin = float(self.distinct[j])
        n_tail = self.tail_size(j)
        log_sum = float(self.suffix_log[j])
        if discreteness is Discreteness.DISCRETE:
            alpha = _discrete_alpha(n_tail, log_sum, xmin)
        else:
            alpha = _continuous_alpha(n_tail, log_sum, xmin)
        offset = self.before[j]
        emp_right = (self.cum[j:] - offset) / n_tail
        emp_left = (self.before[j:] - offset) / n_tail
        distance = _sup_distance(self.distinct[j:], emp_right, emp_left, alpha, xmin, discreteness)
        return alpha, distance


def select_xmin(sample: Sequence[float], config: FitConfig | None = None) -> XminChoice:
    """
    Candidate lower bound minimizing the KS distance between the tail and its
    fitted power law; ties go to the smaller xmin.
    """
    config = config or FitConfig()
    index = TailIndex(sample)
    needed = max(config.min_sample, config.min_tail)
    if index.n < needed:
        raise FitError(REASON_MIN_TAIL, f"sample has {index.n} positive points, need {needed}")
    if len(index.distinct) < 2:
        raise FitError(REASON_DEGENERATE, f"all {index.n} values equal {index.values[0]}")

    candidates = index.candidate_indices(config.min_tail, config.max_candidates)
    if len(candidates) == 0:
        raise FitError(REASON_MIN_TAIL, f"no xmin candidate leaves {config.min_tail} tail points")

    best: tuple[float, float, int] | None = None
    for j in candidates:
        alpha, distance = index.fit_at(int(j), config.discreteness)
        if best is None or distance < best[1]:
            best = (alpha, distance, int(j))

    alpha, distance, j = best
    return XminChoice(
        xmin=float(index.distinct[j]),
        alpha=alpha,
        ks_distance=distance,
        n_tail=index.tail_size(j),
        candidates=len(candidates),
    )
