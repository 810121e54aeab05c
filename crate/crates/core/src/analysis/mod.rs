//! Exact enumeration oracles, finite-`n` diagnostics and the Monte Carlo
//! experiment harness.

mod enumerate;
mod experiment;
mod stats;
mod tables;

pub use enumerate::{
    enumerate_mallows_exact, enumerate_model, mallows_exact_marginals, mallows_expected_fixed_points,
    mallows_weight_sum, rational, ExactPmf, MAX_ENUMERATION_N, MAX_MARGINAL_DP_N, MAX_MU_RANDOM_ENUMERATION_N,
};
pub use experiment::{
    parse_statistic, read_pmf_csv, run_experiment, run_experiment_with, stein_check, stein_check_many, write_pmf_csv,
    AssertionOutcome, ComponentReport, ExperimentConfig, ExperimentReport, JointMomentReport, MomentRow, PmfRow,
    ReferenceComparison, Statistic, SteinCheck, Timing, BATCH_SIZE, CHI_SQUARE_ALPHA, MAX_MOMENT_Z, MAX_REPLICATES,
    REFERENCE_KERNEL_GRID,
};
pub use stats::{
    chi_square_pooled, empirical_pmf, raw_moment, tv_distance, tv_half_width, ChiSquareBin, ChiSquareTest,
    MIN_EXPECTED_PER_BIN,
};
pub use tables::{mallows_trend, marginal_table, transposition_bound, window_for, MarginalTable, TrendReport, TrendRow, MAX_TABLE_CELLS};
