"""Semi-parametric bootstrap goodness-of-fit test for a fitted power-law tail."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np
from opentelemetry import trace

from lobnet.common.core.exceptions import FitError
from lobnet.common.models.schemas import FitConfig
from lobnet.common.utils.rng import STREAM_BOOTSTRAP, derive_rng
from lobnet.plfit.estimators import XminChoice, as_sample, select_xmin
from lobnet.plfit.sampling import rand_powerlaw

logger = logging.getLogger(__name__)


def bootstrap_replica(
    sample: np.ndarray,
    choice: XminChoice,
    config: FitConfig,
    index: int,
) -> float | None:
    """
    KS distance of one synthetic data set, refitted from scratch. Each point
    comes from the fitted tail with probability n_tail/n and from the
    empirical body below xmin otherwise.
    """
    rng = derive_rng(config.rng_seed, STREAM_BOOTSTRAP, index)
    n = len(sample)
    body = sample[sample < choice.xmin]
    n_from_tail = n if len(body) == 0 else int(rng.binomial(n, choice.n_tail / n))
    tail = rand_powerlaw(choice.alpha, choice.xmin, n_from_tail, config.discreteness, rng)
    head = rng.choice(body, size=n - n_from_tail, replace=True) if n > n_from_tail else np.empty(0)
    try:
        return select_xmin(np.concatenate([head, tail]), config).ks_distance
    except FitError as e:
        logger.debug(f"Bootstrap replica {index} could not be fitted: {e}")
        return None


def _replica_chunk(sample: np.ndarray, choice: XminChoice, config: FitConfig, indices: Sequence[int]) -> list:
    return [bootstrap_replica(sample, choice, config, i) for i in indices]


def _chunks(total: int, parts: int) -> list[range]:
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i] < bounds[i + 1]]


def replica_distances(sample: Sequence[float], choice: XminChoice, config: FitConfig) -> list[float | None]:
    """KS distances of all replicas, in replica order whatever the worker count."""
    x = as_sample(sample)
    replicas = config.bootstrap_replicas
    if config.jobs <= 1 or replicas < 2 * config.jobs:
        return _replica_chunk(x, choice, config, range(replicas))

    chunks = _chunks(replicas, config.jobs * 4)
    distances: list[float | None] = []
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        for part in pool.map(_replica_chunk, [x] * len(chunks), [choice] * len(chunks),
                             [config] * len(chunks), chunks):
            distances.extend(part)
    return distances


def gof_pvalue(sample: Sequence[float], choice: XminChoice, config: FitConfig | None = None) -> float:
    """
    Fraction of replicas whose refitted KS distance is at least the empirical
    one. Replicas that cannot be fitted are left out of the fraction.
    """
    config = config or FitConfig()
    tracer = trace.get_tracer(__name__)
    with tracer.start_as_current_span("gof_pvalue") as span:
        span.set_attribute("replicas", config.bootstrap_replicas)
        distances = replica_distances(sample, choice, config)
        fitted = [d for d in distances if d is not None]
        if not fitted:
            raise FitError("bootstrap failed", "no replica could be fitted")
        p_value = sum(d >= choice.ks_distance for d in fitted) / len(fitted)
        span.add_event("bootstrap_done", attributes={"fitted": len(fitted), "p_value": p_value})

    if len(fitted) < len(distances):
        logger.info(f"{len(distances) - len(fitted)} of {len(distances)} bootstrap replicas failed to fit")
    return p_value
