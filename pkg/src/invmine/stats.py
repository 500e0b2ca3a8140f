"""Clopper-Pearson bounds for runs in which every trial succeeded."""

from __future__ import annotations

import math


def cp_lower_bound(n: int, alpha: float) -> float:
    """Lower end of the two-sided exact interval after ``n`` successes in ``n``
    trials: ``(alpha/2) ** (1/n)``."""
    if n < 1:
        raise ValueError("need at least one trial")
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    return (alpha / 2) ** (1 / n)


def cp_trials(alpha: float) -> int:
    """Smallest ``n`` whose all-success lower bound reaches ``1 - alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    n = max(1, math.ceil(math.log(alpha / 2) / math.log(1 - alpha)))
    # guard against rounding in the closed form
    while n > 1 and cp_lower_bound(n - 1, alpha) >= 1 - alpha:
        n -= 1
    while cp_lower_bound(n, alpha) < 1 - alpha:
        n += 1
    return n
