"""Upper bounds, simulation, and screening for generalized familywise
error rates (k-FWER) under independence, negative dependence,
equicorrelation, and near-independence."""

from .bounds import (
    BoundReport,
    CorrelationMatrix,
    Equicorrelated,
    TestConfig,
    alpha_star_chernoff,
    alpha_star_independent,
    alpha_star_negdep,
    alpha_star_search,
    chernoff_tail,
    equicorr_moments,
    hoeffding_kfwer,
    lr_cutoff,
    matrix_bound_report,
    nearly_indep_bound,
    proposed_bound_equicorr,
    second_order_bounds,
)
from .event_inequalities import (
    EventMoments,
    EventSystem,
    binomial_moment_bound,
    combined_bound,
    exact_at_least_k,
    moments_from_system,
    overlap_bound,
)
from .gaussian_tails import (
    bivariate_upper_orthant,
    joint_tail_equicorr,
    mc_joint_tail,
    monhor_integral,
)
from .simulation import SimResult, SimSpec, estimate_kfwer, run_table, sample_equicorr_null

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BoundReport",
    "CorrelationMatrix",
    "Equicorrelated",
    "EventMoments",
    "EventSystem",
    "SimResult",
    "SimSpec",
    "TestConfig",
    "alpha_star_chernoff",
    "alpha_star_independent",
    "alpha_star_negdep",
    "alpha_star_search",
    "binomial_moment_bound",
    "bivariate_upper_orthant",
    "chernoff_tail",
    "combined_bound",
    "equicorr_moments",
    "estimate_kfwer",
    "exact_at_least_k",
    "hoeffding_kfwer",
    "joint_tail_equicorr",
    "lr_cutoff",
    "matrix_bound_report",
    "mc_joint_tail",
    "moments_from_system",
    "monhor_integral",
    "nearly_indep_bound",
    "overlap_bound",
    "proposed_bound_equicorr",
    "run_table",
    "sample_equicorr_null",
    "second_order_bounds",
]
