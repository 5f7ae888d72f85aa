"""Fixed-budget best arm identification toolkit.

Arm indices are 0-based throughout the Python API.
"""

from ._gna_bai import (  # noqa: F401
    AlgorithmKind,
    AlgorithmSpec,
    BanditInstance,
    ConfigError,
    EstimatorKind,
    Family,
    apply_weight_floor,
    bernoulli_closed_forms,
    bernoulli_instance,
    binary_relative_entropy,
    fisher_information,
    fit_decay,
    floor_variance,
    gaussian_instance,
    gj_oracle_weights,
    gna_estimated_weights,
    gna_target_weights,
    kkt_verify,
    kl_bernoulli,
    kl_gaussian,
    pairwise_rate,
    rate_V,
    recommend,
    run,
    run_experiment,
    small_gap_ratio,
    successive_rejects_schedule,
    uniform_weights,
    v_star,
)

__version__ = "0.1.0"
