//! Utility distributions, seeded sampling, and the analytic order-statistic and
//! utility formulas the simulations are checked against.

mod distribution;
mod order_stats;
mod seed;
mod utility;

pub use distribution::Distribution;
pub use order_stats::{
    binomial_negative_moment, expected_nkb, expected_pl, ln_choose, pmf_nkb, pmf_pl, tail_bound_nkb,
    NegativeMoment,
};
pub use seed::SeedSpec;
pub use utility::{
    balanced_utility_with_constraints, balanced_utility_without_constraints, utility_with_constraints_formula,
    utility_without_constraints_formula, UnconstrainedUtility, UtilityBranch,
};

/// Mean and standard error (`sample stddev / sqrt(count)`) of a sequence.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let count = values.len();
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    if count == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64;
    (mean, (var / count as f64).sqrt())
}
