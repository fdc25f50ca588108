//! Leading-order expected latent utilities of subset selection (constant discount)
//! with two groups whose utilities are i.i.d. `U[0, 1]`.

use serde::Serialize;

use crate::error::{invalid, Result};

fn check_sizes(n: u64, m_a: u64, m_b: u64) -> Result<()> {
    if n == 0 || m_a < n || m_b < n {
        return Err(invalid(format!(
            "formula requires m_a, m_b >= n >= 1, got n = {n}, m_a = {m_a}, m_b = {m_b}"
        )));
    }
    Ok(())
}

/// Expected latent utility of the proportionally constrained selection,
/// `n · (1 - n / (2(m_a + m_b)))`.
pub fn utility_with_constraints_formula(n: u64, m_a: u64, m_b: u64) -> Result<f64> {
    check_sizes(n, m_a, m_b)?;
    let n = n as f64;
    Ok(n * (1.0 - n / (2.0 * (m_a + m_b) as f64)))
}

/// Which case of the unconstrained formula applies, decided by `c = m_a (1 - β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityBranch {
    /// `c <= n - n^{5/8}`: bias is mild enough that both groups are selected.
    BiasedRegime,
    /// `c >= n + n^{5/8}`: enough unbiased group-a items to fill every slot.
    SaturatedRegime,
    /// `|c - n| < n^{5/8}`: not covered by either case.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnconstrainedUtility {
    pub value: f64,
    pub branch: UtilityBranch,
}

/// Expected latent utility of the unconstrained selection on biased utilities.
///
/// In the gap between the two regimes the biased-regime expression is returned
/// as the best available estimate, flagged as [`UtilityBranch::Gap`].
pub fn utility_without_constraints_formula(n: u64, m_a: u64, m_b: u64, beta: f64) -> Result<UnconstrainedUtility> {
    check_sizes(n, m_a, m_b)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid(format!("beta must lie in [0, 1], got {beta}")));
    }
    let (nf, ma, mb) = (n as f64, m_a as f64, m_b as f64);
    let c = ma * (1.0 - beta);
    let width = nf.powf(5.0 / 8.0);
    let biased = || {
        let b2 = beta * beta;
        let removed = (ma + mb - nf) / (ma * beta + mb);
        ma * (1.0 - b2) / 2.0 + (ma * b2 + mb) / 2.0 * (1.0 - removed * removed)
    };
    let (value, branch) = if c <= nf - width {
        (biased(), UtilityBranch::BiasedRegime)
    } else if c >= nf + width {
        (nf * (1.0 - nf / (2.0 * ma)), UtilityBranch::SaturatedRegime)
    } else {
        (biased(), UtilityBranch::Gap)
    };
    Ok(UnconstrainedUtility { value, branch })
}

/// Balanced case `m_a = m_b = n`, unconstrained: `(n/2)(1 + 2β/(1+β)²)`.
pub fn balanced_utility_without_constraints(n: u64, beta: f64) -> f64 {
    n as f64 / 2.0 * (1.0 + 2.0 * beta / ((1.0 + beta) * (1.0 + beta)))
}

/// Balanced case `m_a = m_b = n`, constrained at `α = 1/2`: `(3n/4)(1 - 1/(n+1))`.
pub fn balanced_utility_with_constraints(n: u64) -> f64 {
    let nf = n as f64;
    0.75 * nf * (1.0 - 1.0 / (nf + 1.0))
}
