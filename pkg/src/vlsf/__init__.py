"""Achievability bounds for variable-length stop-feedback codes with few decoding times.

The package evaluates, for the BI-AWGN, BSC and BEC channels:

* tight tail approximations of the cumulative information density
  (Edgeworth, moderate-deviation and continuity-corrected series);
* optimal decoding-time placement minimizing the average-blocklength
  bound, by a KKT recursion on differentiable tails and by exact integer
  search on discrete ones, with an outer threshold minimization;
* closed-form baselines and the systematic fountain-coding bounds for
  the BEC, backed by a discrete phase-type rank chain;
* seeded Monte Carlo oracles for both the tails and the rank process.
"""

from .channels import (
    Bec,
    BiAwgn,
    Bsc,
    Channel,
    ChannelStats,
    TailModel,
    bsc_local_maximizers,
    binomial_cdf,
    channel_stats,
    make_tail_model,
    tail_exact_bec,
    tail_exact_bsc,
    tail_model_inverse,
)
from .cumulants import (
    CumulantVector,
    MomentVector,
    PartitionSolutionSet,
    cumulants_from_moments,
    edgeworth_pj,
    enumerate_partitions,
    hermite,
    moments_from_cumulants,
)
from .errors import ConditionError, InfeasibleError, QuadratureError
from .expansions import (
    CramerSeries3,
    ExpansionSpec,
    Lattice,
    bernoulli_number,
    corrected_edgeworth_cdf,
    cramer_series3,
    edgeworth_cdf,
    petrov_tail,
    sheppard_adjust,
)
from .bounds import (
    RankMarkov,
    apply_stop_at_zero,
    backoff_bounds,
    critical_epsilon,
    devassy_bound,
    full_rank_curve,
    polyanskiy_bound,
    rank_cdf_vector,
    rank_full_prob,
    rank_full_prob_range,
    rank_markov,
    st_rlfc_finite_bound,
    st_rlfc_sdo,
    st_rlfc_zero_error_bound,
    st_rlfc_zero_error_bound_markov,
)
from .montecarlo import (
    SimConfig,
    TailEstimate,
    gf2_rank,
    simulate_info_density_curve,
    simulate_info_density_tail,
    simulate_rlfc_rank,
)
from .sdo import (
    SdoProblem,
    SdoSolution,
    certify_kkt,
    discrete_sdo,
    gamma_from_delta,
    gap_constrained_sdo,
    kkt_report,
    log2_message_count,
    objective_value,
    solve_at_delta,
    solve_at_gamma,
    two_step_minimize,
    unconstrained_sdo,
)

__version__ = "0.1.0"
