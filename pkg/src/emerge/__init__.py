"""Merging sequential and independent e-values."""

from emerge.core import (
    ContractViolation,
    EVector,
    GamblingSystem,
    InfeasibleStakeError,
    StakeFunction,
    Trajectory,
    block_product_trajectory,
    convex_combine,
    evaluate_additive,
    evaluate_martingale,
    exceed_and_stop,
    merge_block_product,
    merge_mean,
    merge_product,
    merge_u_statistic,
    to_additive,
)
from emerge.reorder import (
    InvalidStrategyError,
    MixtureComponent,
    ReadingStrategy,
    TwoDecomposition,
    apply_reading_strategy,
    counterexample_G,
    evaluate_reordered,
    merge_generalized,
    merge_symmetric_example,
    merge_two_decomposed,
    se_envelope_of_symmetric_example,
)

__version__ = "0.1.0"
