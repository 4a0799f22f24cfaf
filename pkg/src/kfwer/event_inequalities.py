"""Distribution-free upper bounds on P(at least k of n events occur).

The bounds consume only partial moment information about the event system:

* ``S[m-1]``  -- the sum of all m-wise intersection probabilities,
* ``S_prime[m-2]`` -- the largest total overlap between one (m-1)-tuple
  and the remaining events,
* ``max_intersections[m-1]`` -- the largest single m-wise intersection.

``overlap_bound`` refines the first-moment (Markov) bound S_1/k by
discounting the best-covered (m-1)-tuple; ``binomial_moment_bound`` is
min_m S_m / C(k, m).  ``combined_bound`` takes the better of the two.
An exact enumeration oracle over explicit small systems (n <= 12) backs
the soundness tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import binom_float, log_binom

__all__ = [
    "EventMoments",
    "EventSystem",
    "BoundDecomposition",
    "overlap_bound",
    "binomial_moment_bound",
    "log_binomial_moment_bound",
    "combined_bound",
    "exact_at_least_k",
    "moments_from_system",
]

MAX_ORACLE_EVENTS = 12


@dataclass(frozen=True)
class EventMoments:
    """Partial moment summary of an n-event system, targeted at order k.

    ``S`` has entries for m = 1..k, ``S_prime`` for m = 2..k, and
    ``max_intersections`` for m = 1..k-1 (all stored 0-indexed).
    """

    n: int
    k: int
    S: tuple[float, ...]
    S_prime: tuple[float, ...]
    max_intersections: tuple[float, ...]

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"bounds need k >= 2, got k={self.k}")
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds the number of events n={self.n}")
        if len(self.S) != self.k:
            raise ValueError(f"S must cover m=1..k ({self.k} entries), got {len(self.S)}")
        if len(self.S_prime) != self.k - 1:
            raise ValueError(
                f"S_prime must cover m=2..k ({self.k - 1} entries), got {len(self.S_prime)}"
            )
        if len(self.max_intersections) != self.k - 1:
            raise ValueError(
                f"max_intersections must cover m=1..k-1 ({self.k - 1} entries), "
                f"got {len(self.max_intersections)}"
            )
        for name, seq in (("S", self.S), ("S_prime", self.S_prime),
                          ("max_intersections", self.max_intersections)):
            if any(v < 0 or math.isnan(v) for v in seq):
                raise ValueError(f"{name} entries must be nonnegative, got {seq}")


@dataclass(frozen=True)
class BoundDecomposition:
    """Both bounds with their minimizing orders, and the clamped minimum."""

    overlap_value: float
    overlap_m: int
    moment_value: float
    moment_m: int
    value: float

    def to_dict(self) -> dict:
        return {
            "overlap_bound": self.overlap_value,
            "overlap_argmin_m": self.overlap_m,
            "moment_bound": self.moment_value,
            "moment_argmin_m": self.moment_m,
            "combined_bound": self.value,
        }


def overlap_bound(moments: EventMoments) -> tuple[float, int]:
    """min over 2 <= m <= k of (S_1 - S'_m)/k + ((k-m+1)/k) * maxInter_{m-1}.

    Returns the raw (unclamped) minimum and its order m; ties go to the
    smaller m, which relies on lower-order moment information.
    """
    k = moments.k
    s1 = moments.S[0]
    best, best_m = math.inf, -1
    for m in range(2, k + 1):
        term = (s1 - moments.S_prime[m - 2]) / k \
            + (k - m + 1) / k * moments.max_intersections[m - 2]
        if term < best:
            best, best_m = term, m
    return best, best_m


def binomial_moment_bound(moments: EventMoments) -> tuple[float, int]:
    """min over 1 <= m <= k of S_m / C(k, m); m=1 is the Markov term S_1/k."""
    k = moments.k
    best, best_m = math.inf, -1
    for m in range(1, k + 1):
        s = moments.S[m - 1]
        denom = binom_float(k, m)
        if math.isfinite(denom):
            term = s / denom
        elif s > 0.0:
            term = math.exp(math.log(s) - log_binom(k, m))
        else:
            term = 0.0
        if term < best:
            best, best_m = term, m
    return best, best_m


def log_binomial_moment_bound(log_S, k: int) -> tuple[float, int]:
    """Log-domain variant for overflow-prone regimes: ``log_S`` holds
    ln S_m for m = 1..k; returns (ln of the minimum term, argmin m)."""
    log_S = np.asarray(log_S, dtype=float)
    if len(log_S) != k:
        raise ValueError(f"log_S must cover m=1..k ({k} entries), got {len(log_S)}")
    ms = np.arange(1, k + 1)
    log_terms = log_S - np.array([log_binom(k, int(m)) for m in ms])
    idx = int(np.argmin(log_terms))
    return float(log_terms[idx]), int(ms[idx])


def combined_bound(moments: EventMoments) -> BoundDecomposition:
    """Best of the overlap and binomial-moment bounds, clamped to [0, 1]."""
    a_val, a_m = overlap_bound(moments)
    b_val, b_m = binomial_moment_bound(moments)
    raw = min(a_val, b_val)
    return BoundDecomposition(
        overlap_value=a_val,
        overlap_m=a_m,
        moment_value=b_val,
        moment_m=b_m,
        value=min(1.0, max(0.0, raw)),
    )


# --------------------------------------------------------------------------
# Exact enumeration oracle over explicit small systems.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EventSystem:
    """Explicit joint distribution over the 2^n outcome atoms of n events.

    ``atom_probs[s]`` is the probability of the outcome in which exactly
    the events whose bits are set in s occur.  Oracle-only: n <= 12.
    """

    n: int
    atom_probs: tuple[float, ...]

    def __post_init__(self):
        if not (1 <= self.n <= MAX_ORACLE_EVENTS):
            raise ValueError(f"oracle systems support 1 <= n <= {MAX_ORACLE_EVENTS}, got {self.n}")
        if len(self.atom_probs) != 1 << self.n:
            raise ValueError(
                f"need 2^{self.n} = {1 << self.n} atoms, got {len(self.atom_probs)}"
            )
        if any(p < 0 for p in self.atom_probs):
            raise ValueError("atom probabilities must be nonnegative")
        total = math.fsum(self.atom_probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities must sum to 1 (got {total!r})")

    @staticmethod
    def independent(probs) -> "EventSystem":
        """System of independent events with the given marginals."""
        n = len(probs)
        atoms = []
        for s in range(1 << n):
            p = 1.0
            for i, pi in enumerate(probs):
                p *= pi if (s >> i) & 1 else (1.0 - pi)
            atoms.append(p)
        return EventSystem(n=n, atom_probs=tuple(atoms))


def _superset_sums(system: EventSystem) -> np.ndarray:
    """g[mask] = P(all events in mask occur), for every mask at once."""
    g = np.array(system.atom_probs, dtype=float)
    for bit in range(system.n):
        step = 1 << bit
        for mask in range(len(g)):
            if not mask & step:
                g[mask] += g[mask | step]
    return g


def exact_at_least_k(system: EventSystem, k: int) -> float:
    """Exact P(at least k events occur) by atom enumeration."""
    if k <= 0:
        return 1.0
    if k > system.n:
        return 0.0
    return math.fsum(
        p for s, p in enumerate(system.atom_probs) if bin(s).count("1") >= k
    )


def moments_from_system(system: EventSystem, k: int) -> EventMoments:
    """Exact S, S', and max-intersection vectors up to order k."""
    n = system.n
    if not (2 <= k <= n):
        raise ValueError(f"need 2 <= k <= n={n}, got k={k}")
    g = _superset_sums(system)
    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for mask in range(1 << n):
        masks_by_size[bin(mask).count("1")].append(mask)

    S = [math.fsum(g[m] for m in masks_by_size[size]) for size in range(1, k + 1)]
    max_inter = [max(g[m] for m in masks_by_size[size]) for size in range(1, k)]

    S_prime = []
    for size in range(2, k + 1):
        best = 0.0
        for tup in masks_by_size[size - 1]:
            total = math.fsum(
                g[tup | (1 << j)] for j in range(n) if not (tup >> j) & 1
            )
            best = max(best, total)
        S_prime.append(best)

    return EventMoments(
        n=n, k=k, S=tuple(S), S_prime=tuple(S_prime), max_intersections=tuple(max_inter)
    )
