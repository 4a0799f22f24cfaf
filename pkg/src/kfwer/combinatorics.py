"""Log-domain binomial coefficients for large-n bound arithmetic."""

from __future__ import annotations

import math

__all__ = ["log_binom", "binom_float"]


def log_binom(n: int, k: int) -> float:
    """ln C(n, k) via log-gamma; exact enough for n up to 1e7+."""
    if k < 0 or k > n:
        return float("-inf")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binom_float(n: int, k: int) -> float:
    """C(n, k) as a float: exact integer arithmetic when the value fits,
    +inf when it overflows float range."""
    if k < 0 or k > n:
        return 0.0
    try:
        return float(math.comb(n, k))
    except OverflowError:
        return float("inf")
