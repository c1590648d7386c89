"""Power-law random variates by inverse transform."""
from __future__ import annotations

import numpy as np
from scipy.special import zeta

from lobnet.common.models.schemas import Discreteness

# largest integer a float64 represents exactly
_MAX_EXACT = float(2 ** 53)


def _discrete_inverse(u: np.ndarray, alpha: float, xmin: int) -> np.ndarray:
    """
    Largest x with P(X >= x) >= u, i.e. X = x iff S(x+1) < u <= S(x), where
    S(x) = zeta(alpha, x) / zeta(alpha, xmin). Bracket by doubling, then
    integer bisection, all vectorized.
    """
    norm = zeta(alpha, xmin)

    def survival(x: np.ndarray) -> np.ndarray:
        return zeta(alpha, x) / norm

    lo = np.full(u.shape, float(xmin))
    hi = np.full(u.shape, float(xmin))
    open_ = survival(hi) >= u
    while np.any(open_):
        lo = np.where(open_, hi, lo)
        hi = np.where(open_, np.minimum(hi * 2.0, _MAX_EXACT), hi)
        open_ = open_ & (hi < _MAX_EXACT) & (survival(hi) >= u)

    # invariant: S(lo) >= u, and S(hi) < u unless hi hit the cap
    while True:
        gap = hi - lo > 1.0
        if not np.any(gap):
            break
        mid = np.floor((lo + hi) / 2.0)
        keep = survival(mid) >= u
        lo = np.where(gap & keep, mid, lo)
        hi = np.where(gap & ~keep, mid, hi)
    return lo


def rand_powerlaw(
    alpha: float,
    xmin: float,
    n: int,
    discreteness: Discreteness,
    rng: np.random.Generator,
) -> np.ndarray:
    """n i.i.d. draws from the power law with PDF exponent alpha above xmin."""
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return np.empty(0, dtype=float)

    u = rng.random(n)
    if discreteness is Discreteness.CONTINUOUS:
        return xmin * (1.0 - u) ** (-1.0 / (alpha - 1.0))
    # 1 - u lies in (0, 1], so the draw at u = 0 is xmin itself
    return _discrete_inverse(1.0 - u, alpha, int(np.ceil(xmin)))
