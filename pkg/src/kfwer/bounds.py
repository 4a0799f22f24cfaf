"""Upper bounds on the generalized familywise error rate (k-FWER).

Everything here concerns the one-sided normal-means screen that rejects
hypothesis i when X_i exceeds an upper-tail cutoff.  The baseline
(Lehmann-Romano) cutoff at level alpha is Phi^-1(1 - k alpha / n); an
*inflated* level alpha_star >= alpha keeps k-FWER <= alpha while rejecting
more, and each ``alpha_star_*`` function realizes one dependence regime:

* ``alpha_star_search``      -- largest level whose second-order bound
                                (min of pair-sum / max-neighbor) stays <= alpha;
* ``alpha_star_independent`` -- closed form of the search under independence;
* ``alpha_star_negdep``      -- product-bound form for (weakly) negatively
                                dependent statistics;
* ``alpha_star_chernoff``    -- Chernoff-bound form, always weaker than the
                                negative-dependence form.

``proposed_bound_equicorr`` evaluates the sharper moment bounds of
``event_inequalities`` under equicorrelation (where every m-wise
intersection equals a common orthant probability) and reports the best
bound available, alongside the classical second-order value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .combinatorics import log_binom
from .distributions import std_normal_quantile, upper_tail_quantile
from .event_inequalities import log_binomial_moment_bound
from .gaussian_tails import MAX_RHO, log_joint_tail_equicorr, monhor_integral

__all__ = [
    "TestConfig",
    "Equicorrelated",
    "CorrelationMatrix",
    "CorrelationModel",
    "SecondOrderBounds",
    "EquicorrMoments",
    "BoundReport",
    "lr_cutoff",
    "second_order_bounds",
    "alpha_star_search",
    "alpha_star_independent",
    "alpha_star_negdep",
    "chernoff_tail",
    "alpha_star_chernoff",
    "hoeffding_kfwer",
    "equicorr_moments",
    "proposed_bound_equicorr",
    "matrix_bound_report",
    "nearly_indep_bound",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TestConfig:
    """One multiple-testing instance: n hypotheses, order k, level alpha."""

    n: int
    k: int
    alpha: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (1 <= self.k <= self.n):
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class Equicorrelated:
    """All off-diagonal correlations equal ``rho`` in [0, MAX_RHO]."""

    rho: float

    def __post_init__(self):
        if not (0.0 <= self.rho <= MAX_RHO):
            raise ValueError(f"rho must lie in [0, {MAX_RHO}], got {self.rho}")


class CorrelationMatrix:
    """Explicit n x n correlation matrix with entries in [0, MAX_RHO].

    Off-diagonal entries must be nonnegative: every formula here
    integrates correlation corrections over [0, rho_ij].
    """

    def __init__(self, values):
        m = np.asarray(values, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"correlation matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(m), 1.0, atol=1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        off = m[~np.eye(m.shape[0], dtype=bool)]
        if off.size and (off.min() < 0.0 or off.max() > MAX_RHO):
            raise ValueError(f"off-diagonal entries must lie in [0, {MAX_RHO}]")
        self.values = m
        self.n = m.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1) - 1.0

    def max_row_index(self) -> int:
        """Index with the largest total correlation to the others."""
        return int(np.argmax(self.row_sums()))


CorrelationModel = Union[Equicorrelated, CorrelationMatrix]


@dataclass(frozen=True)
class SecondOrderBounds:
    """The two classical k-FWER bounds built from pairwise information."""

    pair_sum: float
    max_neighbor: float

    @property
    def min_value(self) -> float:
        return min(self.pair_sum, self.max_neighbor)


def lr_cutoff(config: TestConfig, level: Optional[float] = None) -> float:
    """Rejection cutoff Phi^-1(1 - k*level/n); ``level`` defaults to alpha."""
    level = config.alpha if level is None else level
    tail = config.k * level / config.n
    if not (0.0 < tail < 1.0):
        raise ValueError(
            f"k*level/n must lie in (0, 1), got {tail} (k={config.k}, "
            f"level={level}, n={config.n})"
        )
    return upper_tail_quantile(tail)


def _pair_integral_sums(
    model: CorrelationModel, n: int, c: float, strict_pairs: bool
) -> tuple[float, float]:
    """(sum over unordered pairs of J(rho_ij, c),
        sum over j != i_star of J(rho_{i_star, j}, c))
    where J is the bivariate correlation-correction integral.

    ``strict_pairs`` drops every pair involving the last index from the
    pair sum, mirroring a narrower published index range; the default sums
    all C(n, 2) pairs.  Repeated correlation values share one quadrature.
    """
    cache: dict[float, float] = {}

    def J(rho: float) -> float:
        if rho not in cache:
            cache[rho] = monhor_integral(rho, c)
        return cache[rho]

    if isinstance(model, Equicorrelated):
        n_pairs = (n - 1) * (n - 2) // 2 if strict_pairs else n * (n - 1) // 2
        return n_pairs * J(model.rho), (n - 1) * J(model.rho)

    if model.n != n:
        raise ValueError(f"matrix is {model.n} x {model.n} but n = {n}")
    vals = model.values
    top = n - 1 if strict_pairs else n
    pair_total = 0.0
    for i in range(top):
        for j in range(i + 1, top):
            pair_total += J(vals[i, j])
    i_star = model.max_row_index()
    neighbor_total = math.fsum(J(vals[i_star, j]) for j in range(n) if j != i_star)
    return pair_total, neighbor_total


def second_order_bounds(
    config: TestConfig,
    model: CorrelationModel,
    beta: float,
    strict_pairs: bool = False,
) -> SecondOrderBounds:
    """Both pairwise k-FWER bounds at trial level ``beta``.

    pair_sum:     (n-1)k/(n(k-1)) beta^2 + [sum of pair integrals]/(pi k (k-1))
    max_neighbor: beta (n+k-1)/n - (n-1)k beta^2/n^2
                  - [max-row integral sum]/(2 pi k)

    Both are the order-2 specializations of the moment bounds in
    ``event_inequalities`` under the Gaussian model, so their minimum is
    the classical ("existing") bound reported for this screen.
    """
    n, k = config.n, config.k
    if k < 2:
        raise ValueError("second-order bounds need k >= 2")
    if not (0.0 < beta < 1.0):
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    c = lr_cutoff(config, beta)
    pair_total, neighbor_total = _pair_integral_sums(model, n, c, strict_pairs)
    pair_sum = ((n - 1) * k / (n * (k - 1))) * beta * beta \
        + pair_total / (math.pi * k * (k - 1))
    max_neighbor = beta * (n + k - 1) / n - (n - 1) * k * beta * beta / (n * n) \
        - neighbor_total / (_TWO_PI * k)
    return SecondOrderBounds(pair_sum=pair_sum, max_neighbor=max_neighbor)


def alpha_star_search(
    config: TestConfig,
    model: CorrelationModel,
    grid_size: int = 400,
    tol: float = 1e-8,
    strict_pairs: bool = False,
) -> float:
    """Largest level beta in (alpha, 1) with second-order bound <= alpha.

    The qualifying set is not known to be an interval, so a logarithmic
    grid locates the top qualifying point before bisection sharpens the
    boundary to ``tol``; the returned level is re-validated by direct
    evaluation and falls back to alpha itself when nothing larger
    qualifies.
    """
    alpha = config.alpha

    def qualifies(beta: float) -> bool:
        return second_order_bounds(config, model, beta, strict_pairs).min_value <= alpha

    grid = np.geomspace(alpha, 1.0 - 1e-12, grid_size)
    ok = np.array([qualifies(float(b)) for b in grid])
    if not ok.any():
        return alpha
    top = int(np.max(np.nonzero(ok)))
    lo = float(grid[top])
    hi = float(grid[top + 1]) if top + 1 < grid_size else 1.0 - 1e-12
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if qualifies(mid):
            lo = mid
        else:
            hi = mid
    assert qualifies(lo)
    return max(lo, alpha)


def alpha_star_independent(config: TestConfig) -> float:
    """Closed form sqrt(n (k-1) alpha / ((n-1) k)) of the search under
    independence; valid when k >= 2 and alpha <= n(k-1)/((n-1)k)."""
    n, k, alpha = config.n, config.k, config.alpha
    if k < 2:
        raise ValueError("the closed form needs k >= 2")
    limit = n * (k - 1) / ((n - 1) * k)
    if alpha > limit:
        raise ValueError(
            f"closed form requires alpha <= n(k-1)/((n-1)k) = {limit:.6g}, "
            f"got alpha = {alpha}"
        )
    return math.sqrt(n * (k - 1) * alpha / ((n - 1) * k))


def alpha_star_negdep(config: TestConfig) -> float:
    """[n / (k C(n,k)^(1/k))] alpha^(1/k), evaluated in log domain and
    clamped to 1; valid under weak negative dependence (and independence)."""
    n, k, alpha = config.n, config.k, config.alpha
    log_value = (
        math.log(n) - math.log(k)
        - log_binom(n, k) / k
        + math.log(alpha) / k
    )
    return min(1.0, math.exp(log_value))


def chernoff_tail(n: int, p: float, a: float) -> float:
    """Optimized Chernoff bound on P(Binomial(n, p) >= a).

    Evaluates [e^delta / (1+delta)^(1+delta)]^(np) at delta = a/(np) - 1;
    returns 1 when a <= np (the bound is vacuous there).
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must be in (0, 1), got {p}")
    mean = n * p
    if a <= mean:
        return 1.0
    delta = a / mean - 1.0
    log_value = mean * (delta - (1.0 + delta) * math.log1p(delta))
    return math.exp(log_value)


def alpha_star_chernoff(k: int, alpha: float) -> float:
    """alpha^(1/k) / e: the Chernoff-derived inflated level."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return alpha ** (1.0 / k) / math.e


def hoeffding_kfwer(config: TestConfig, alpha_star: float) -> float:
    """Hoeffding bound exp(-2 k^2 (1 - alpha_star)^2 / n) on the k-FWER of
    the screen at inflated level alpha_star; vanishes when k^2/n grows."""
    if not (0.0 < alpha_star < 1.0):
        raise ValueError(f"alpha_star must be in (0, 1), got {alpha_star}")
    d = config.k * (1.0 - alpha_star)
    return math.exp(-2.0 * d * d / config.n)


@dataclass(frozen=True)
class EquicorrMoments:
    """Moment summary of the equicorrelated exceedance events at a level.

    ``tail_probs[m-1]`` is the common m-wise upper-orthant probability,
    ``log_intersection_sums[m-1]`` is ln(C(n,m) * tail_probs[m-1]),
    ``overlap_sums[m-2]`` is the (m-1)-tuple overlap total
    (n-m+1) * tail_probs[m-1], and ``term_ratios[m-1]`` is the ratio of
    consecutive binomial-moment-bound terms
    ((n-m)/(k-m)) * tail_probs[m]/tail_probs[m-1].  ``crossing_index`` is
    the smallest m with ratio >= 1 (None when every ratio is below 1);
    when the ratios increase with m, it is the order minimizing
    S_m / C(k, m).
    """

    config: TestConfig
    rho: float
    beta: float
    cutoff: float
    tail_probs: np.ndarray = field(repr=False)
    log_tail_probs: np.ndarray = field(repr=False)
    log_intersection_sums: np.ndarray = field(repr=False)
    overlap_sums: np.ndarray = field(repr=False)
    term_ratios: np.ndarray = field(repr=False)
    crossing_index: Optional[int]


def equicorr_moments(
    config: TestConfig, rho: float, beta: Optional[float] = None
) -> EquicorrMoments:
    """Orthant probabilities and bound-term diagnostics at level ``beta``
    (defaults to alpha) under equicorrelation ``rho``."""
    n, k = config.n, config.k
    if k < 2:
        raise ValueError("moment summaries need k >= 2")
    beta = config.alpha if beta is None else beta
    c = lr_cutoff(config, beta)
    ms = np.arange(1, k + 1)
    log_a = log_joint_tail_equicorr(ms, c, rho)
    a = np.exp(log_a)
    log_S = np.array([log_binom(n, int(m)) for m in ms]) + log_a
    overlap = (n - ms[1:] + 1) * a[1:]
    ratios = ((n - ms[:-1]) / (k - ms[:-1])) * np.exp(log_a[1:] - log_a[:-1])
    above = np.nonzero(ratios >= 1.0)[0]
    crossing = int(above[0]) + 1 if above.size else None
    return EquicorrMoments(
        config=config,
        rho=rho,
        beta=beta,
        cutoff=c,
        tail_probs=a,
        log_tail_probs=log_a,
        log_intersection_sums=log_S,
        overlap_sums=overlap,
        term_ratios=ratios,
        crossing_index=crossing,
    )


@dataclass(frozen=True)
class BoundReport:
    """Every bound computed for one instance, ready for JSON emission.

    ``existing_bound`` is the minimum of the two second-order bounds;
    ``proposed_bound`` additionally admits the sharper overlap/moment
    bounds, so it can only improve on the existing value.  Probability
    fields are clamped to [0, 1]; the component bounds are kept raw.
    """

    n: int
    k: int
    alpha: float
    rho: Optional[float]
    cutoff: float
    pair_sum_bound: float
    max_neighbor_bound: float
    existing_bound: float
    overlap_bound: Optional[float]
    overlap_argmin_m: Optional[int]
    moment_bound: Optional[float]
    moment_argmin_m: Optional[int]
    proposed_bound: float
    alpha_star_search: float
    alpha_star_independent: Optional[float]
    alpha_star_negdep: float
    alpha_star_chernoff: float
    hoeffding_bound: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "alpha": self.alpha,
            "rho": self.rho,
            "cutoff": self.cutoff,
            "pair_sum_bound": self.pair_sum_bound,
            "max_neighbor_bound": self.max_neighbor_bound,
            "existing_bound": self.existing_bound,
            "overlap_bound": self.overlap_bound,
            "overlap_argmin_m": self.overlap_argmin_m,
            "moment_bound": self.moment_bound,
            "moment_argmin_m": self.moment_argmin_m,
            "proposed_bound": self.proposed_bound,
            "alpha_star_search": self.alpha_star_search,
            "alpha_star_independent": self.alpha_star_independent,
            "alpha_star_negdep": self.alpha_star_negdep,
            "alpha_star_chernoff": self.alpha_star_chernoff,
            "hoeffding_bound": self.hoeffding_bound,
        }


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _alpha_star_indep_or_none(config: TestConfig) -> Optional[float]:
    try:
        return alpha_star_independent(config)
    except ValueError:
        return None


def proposed_bound_equicorr(
    config: TestConfig, rho: float, strict_pairs: bool = False
) -> BoundReport:
    """Full bound report for an equicorrelated instance at level alpha.

    Exchangeability collapses the general moment vectors to closed forms
    (every m-wise intersection equals the common orthant probability), so
    the overlap and binomial-moment bounds are evaluated exactly and the
    reported bound is their minimum together with both second-order
    bounds.
    """
    n, k, alpha = config.n, config.k, config.alpha
    mom = equicorr_moments(config, rho)
    a = mom.tail_probs

    s1 = n * a[0]
    overlap_terms = (s1 - mom.overlap_sums) / k \
        + (k - np.arange(2, k + 1) + 1) / k * a[:-1]
    a_idx = int(np.argmin(overlap_terms))
    overlap_val = float(overlap_terms[a_idx])
    overlap_m = a_idx + 2

    log_b, moment_m = log_binomial_moment_bound(mom.log_intersection_sums, k)
    moment_val = math.exp(log_b)

    so = second_order_bounds(config, Equicorrelated(rho), alpha, strict_pairs)
    existing = so.min_value
    proposed = min(overlap_val, moment_val, existing)

    ast_search = alpha_star_search(config, Equicorrelated(rho), strict_pairs=strict_pairs)
    return BoundReport(
        n=n, k=k, alpha=alpha, rho=rho,
        cutoff=mom.cutoff,
        pair_sum_bound=so.pair_sum,
        max_neighbor_bound=so.max_neighbor,
        existing_bound=_clamp01(existing),
        overlap_bound=overlap_val,
        overlap_argmin_m=overlap_m,
        moment_bound=moment_val,
        moment_argmin_m=moment_m,
        proposed_bound=_clamp01(proposed),
        alpha_star_search=ast_search,
        alpha_star_independent=_alpha_star_indep_or_none(config),
        alpha_star_negdep=alpha_star_negdep(config),
        alpha_star_chernoff=alpha_star_chernoff(k, alpha),
        hoeffding_bound=hoeffding_kfwer(config, ast_search),
    )


def matrix_bound_report(
    config: TestConfig, model: CorrelationMatrix, strict_pairs: bool = False
) -> BoundReport:
    """Bound report for an explicit correlation matrix.

    The sharper overlap/moment bounds rely on exchangeability and are not
    computed here; the proposed bound falls back to the second-order
    minimum.
    """
    so = second_order_bounds(config, model, config.alpha, strict_pairs)
    existing = so.min_value
    ast_search = alpha_star_search(config, model, strict_pairs=strict_pairs)
    return BoundReport(
        n=config.n, k=config.k, alpha=config.alpha, rho=None,
        cutoff=lr_cutoff(config),
        pair_sum_bound=so.pair_sum,
        max_neighbor_bound=so.max_neighbor,
        existing_bound=_clamp01(existing),
        overlap_bound=None,
        overlap_argmin_m=None,
        moment_bound=None,
        moment_argmin_m=None,
        proposed_bound=_clamp01(existing),
        alpha_star_search=ast_search,
        alpha_star_independent=_alpha_star_indep_or_none(config),
        alpha_star_negdep=alpha_star_negdep(config),
        alpha_star_chernoff=alpha_star_chernoff(config.k, config.alpha),
        hoeffding_bound=hoeffding_kfwer(config, ast_search),
    )


def nearly_indep_bound(
    config: TestConfig, model: CorrelationModel, alpha_star: float
) -> float:
    """First-order bound C(n,k) (k a*/n)^k (1 + (c^2/2) R) for weakly
    correlated statistics, with c the cutoff at level alpha_star.

    R is the largest possible sum of the k(k-1) ordered correlation pairs
    inside a rejected k-tuple: exact under equicorrelation (every tuple
    gives k(k-1) rho); for an explicit matrix the exact tuple maximum is a
    combinatorial optimization, so the sum of the k(k-1) largest ordered
    off-diagonal entries is used instead, an upper bound that preserves
    the direction of the inequality.
    """
    n, k = config.n, config.k
    tail = k * alpha_star / n
    if not (0.0 < tail < 1.0):
        raise ValueError(f"k*alpha_star/n must lie in (0, 1), got {tail}")
    c = upper_tail_quantile(tail)
    if isinstance(model, Equicorrelated):
        pair_total = k * (k - 1) * model.rho
    else:
        if model.n != n:
            raise ValueError(f"matrix is {model.n} x {model.n} but n = {n}")
        iu = np.triu_indices(n, 1)
        off = np.sort(model.values[iu])[::-1]
        take = min(k * (k - 1) // 2, off.size)
        pair_total = 2.0 * float(off[:take].sum())
    log_value = log_binom(n, k) + k * math.log(tail) \
        + math.log1p(0.5 * c * c * pair_total)
    return math.exp(log_value)
