"""Joint upper-tail probabilities for equicorrelated standard normals.

Two independent computational routes are kept side by side on purpose:

* a bivariate representation integral (``monhor_integral``) that gives the
  pairwise orthant probability in closed quadrature form, and
* a one-factor Gauss-Hermite reduction (``joint_tail_equicorr``) that
  handles any intersection order m, evaluated in log domain so that
  [P(Z > c)]^m does not underflow for m in the tens.

A seeded Monte Carlo oracle (``mc_joint_tail``) cross-validates both.
Correlations are restricted to [0, MAX_RHO]: the formulas used here
integrate over a nonnegative correlation range and the one-factor
representation X_i = sqrt(rho) Z0 + sqrt(1-rho) Z_i requires rho >= 0;
the cap stays clear of the rho -> 1 quadrature singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp, roots_hermite

from .distributions import std_normal_log_sf, std_normal_sf

__all__ = [
    "MAX_RHO",
    "OrthantProb",
    "monhor_integral",
    "bivariate_upper_orthant",
    "joint_tail_equicorr",
    "log_joint_tail_equicorr",
    "mc_joint_tail",
]

MAX_RHO = 0.999

_TWO_PI = 2.0 * math.pi


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if math.isnan(rho) or rho < 0.0 or rho > MAX_RHO:
        raise ValueError(
            f"correlation must lie in [0, {MAX_RHO}] (negative or near-unit "
            f"correlations are out of range), got {rho!r}"
        )
    return rho


@dataclass(frozen=True)
class OrthantProb:
    """m-wise joint upper-orthant probability P(X_1 > c, ..., X_m > c)."""

    m: int
    c: float
    rho: float
    value: float
    log_value: float


def monhor_integral(rho: float, x: float) -> float:
    """integral_0^rho (1 - z^2)^(-1/2) exp(-x^2 / (1 + z)) dz.

    This is the correlation correction in the bivariate-normal identity
    P(X <= x, Y <= x) = Phi(x)^2 + (value) / (2 pi).  The substitution
    z = sin(theta) removes the endpoint singularity, after which adaptive
    Gauss-Kronrod quadrature reaches ~1e-12 absolute error.
    """
    rho = _check_rho(rho)
    if not math.isfinite(x):
        raise ValueError(f"threshold must be finite, got {x!r}")
    if rho == 0.0:
        return 0.0
    theta_max = math.asin(rho)
    xsq = x * x

    def integrand(theta: float) -> float:
        return math.exp(-xsq / (1.0 + math.sin(theta)))

    value, _ = integrate.quad(integrand, 0.0, theta_max, epsabs=1e-14, epsrel=1e-12)
    return value


def bivariate_upper_orthant(rho: float, c: float) -> float:
    """P(X > c, Y > c) for standard normals with correlation rho >= 0."""
    p = std_normal_sf(c)
    return p * p + monhor_integral(rho, c) / _TWO_PI


class _HermiteRule:
    """Cached Gauss-Hermite rule on the shared-factor axis.

    Nodes come from scipy's stable Golub-Welsch evaluation; nodes whose
    weights underflow to zero are dropped, which is safe here because the
    integrand is a probability (<= 1) and cannot compensate a zero weight.
    """

    def __init__(self, n_nodes: int = 512):
        nodes, weights = roots_hermite(n_nodes)
        keep = weights > 0.0
        self.z = math.sqrt(2.0) * nodes[keep]
        self.log_w = np.log(weights[keep]) - 0.5 * math.log(math.pi)


_RULE = _HermiteRule()

_log_sf_vec = np.vectorize(std_normal_log_sf, otypes=[float])


def log_joint_tail_equicorr(ms, c: float, rho: float) -> np.ndarray:
    """log P(all of X_{1..m} > c) for each m in ``ms`` (one-factor rule).

    Conditioning on the shared factor Z0 makes the coordinates independent
    with exceedance probability p(z) = P(Z > (c - sqrt(rho) z)/sqrt(1-rho)),
    so the joint tail is the Gauss-Hermite average of p(z)^m, accumulated
    as exp(m log p) under a logsumexp.
    """
    rho = _check_rho(rho)
    ms = np.atleast_1d(np.asarray(ms, dtype=int))
    if (ms < 1).any():
        raise ValueError("intersection order m must be >= 1")
    if rho == 0.0:
        return ms * std_normal_log_sf(c)
    t = (c - math.sqrt(rho) * _RULE.z) / math.sqrt(1.0 - rho)
    log_p = _log_sf_vec(t)
    return logsumexp(_RULE.log_w[None, :] + ms[:, None] * log_p[None, :], axis=1)


def joint_tail_equicorr(m: int, c: float, rho: float) -> OrthantProb:
    """m-wise upper-orthant probability at threshold c, correlation rho."""
    log_value = float(log_joint_tail_equicorr(m, c, rho)[0])
    return OrthantProb(m=int(m), c=float(c), rho=float(rho), value=math.exp(log_value), log_value=log_value)


def mc_joint_tail(
    m: int,
    c: float,
    rho: float,
    reps: int,
    seed: int,
    chunk_size: int = 1 << 18,
) -> tuple[float, float]:
    """Monte Carlo estimate of the m-wise orthant probability.

    Samples X_i = sqrt(rho) Z0 + sqrt(1-rho) Z_i in fixed-size chunks, each
    chunk drawing from its own substream derived from (seed, chunk index),
    and sums hit counts in chunk order: results are bit-identical for a
    given (seed, chunk_size) no matter how chunks would be scheduled.

    Returns (estimate, standard error).
    """
    rho = _check_rho(rho)
    if m < 1 or reps < 1:
        raise ValueError("m and reps must be positive")
    sr = math.sqrt(rho)
    s1r = math.sqrt(1.0 - rho)
    hits = 0
    done = 0
    chunk_index = 0
    while done < reps:
        size = min(chunk_size, reps - done)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_index,)))
        z0 = rng.standard_normal(size)
        z = rng.standard_normal((size, m))
        x = sr * z0[:, None] + s1r * z
        hits += int((x > c).all(axis=1).sum())
        done += size
        chunk_index += 1
    est = hits / reps
    se = math.sqrt(est * (1.0 - est) / reps)
    return est, se
