//! Closed forms for where the underprivileged group lands in the latent-optimal
//! ranking when both groups draw utilities from the same continuous distribution.
//!
//! With `m_a + m_b` exchangeable items, the group labels of the sorted list form a
//! uniformly random arrangement, so
//! * `N_kb`, the number of group-b items in the top k, is hypergeometric, and
//! * `P_ℓ`, the position of the ℓ-th group-b item, is a shifted negative hypergeometric.
//!
//! Binomial coefficients are evaluated in log-space; `C(2000, 1000)` does not fit in any
//! machine integer.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Result};

/// `ln C(n, k)`, or `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_binomial(n, k)
}

/// `E[N_kb] = k · m_b / (m_a + m_b)`.
pub fn expected_nkb(k: u64, m_a: u64, m_b: u64) -> f64 {
    if m_a + m_b == 0 {
        return 0.0;
    }
    k as f64 * m_b as f64 / (m_a + m_b) as f64
}

/// `E[P_ℓ] = ℓ · (m_a + m_b + 1) / (m_b + 1)`.
pub fn expected_pl(l: u64, m_a: u64, m_b: u64) -> Result<f64> {
    if l == 0 || l > m_b {
        return Err(invalid(format!("need 1 <= l <= m_b, got l = {l}, m_b = {m_b}")));
    }
    Ok(l as f64 * (1.0 + m_a as f64 / (m_b as f64 + 1.0)))
}

/// `Pr[N_kb = j] = C(k, j) · C(m_a + m_b - k, m_b - j) / C(m_a + m_b, m_b)`; zero off support.
pub fn pmf_nkb(j: u64, k: u64, m_a: u64, m_b: u64) -> f64 {
    let m = m_a + m_b;
    if k > m || j > k || j > m_b || m_b - j > m - k {
        return 0.0;
    }
    (ln_choose(k, j) + ln_choose(m - k, m_b - j) - ln_choose(m, m_b)).exp()
}

/// `Pr[P_ℓ = k] = C(k - 1, ℓ - 1) · C(m_a + m_b - k, m_b - ℓ) / C(m_a + m_b, m_b)`; zero off support.
pub fn pmf_pl(k: u64, l: u64, m_a: u64, m_b: u64) -> f64 {
    if l == 0 || l > m_b || k < l || k > m_a + l {
        return 0.0;
    }
    let m = m_a + m_b;
    (ln_choose(k - 1, l - 1) + ln_choose(m - k, m_b - l) - ln_choose(m, m_b)).exp()
}

/// Lower-tail bound `Pr[N_kb <= E[N_kb] - δ] <= exp(-2(δ² - 1)/k)`, valid for `δ >= 2`.
pub fn tail_bound_nkb(delta: f64, k: u64) -> Result<f64> {
    if !(delta >= 2.0) {
        return Err(invalid(format!("tail bound requires delta >= 2, got {delta}")));
    }
    if k == 0 {
        return Err(invalid("tail bound requires k >= 1"));
    }
    Ok((-2.0 * (delta * delta - 1.0) / k as f64).exp())
}

/// Exact and leading-order values of `E[(n / (2n - N))^power]` for `N ~ Binomial(n, 1 - β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeMoment {
    pub exact: f64,
    /// `(1 / (1 + β))^power`.
    pub approx: f64,
}

pub fn binomial_negative_moment(n: u64, beta: f64, power: u32) -> Result<NegativeMoment> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(power == 1 || power == 2) {
        return Err(invalid(format!("power must be 1 or 2, got {power}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let approx = (1.0 / (1.0 + beta)).powi(power as i32);
    let q = 1.0 - beta;
    let exact = if q == 0.0 {
        0.5f64.powi(power as i32)
    } else {
        let (ln_q, ln_b) = (q.ln(), beta.ln());
        let nf = n as f64;
        (0..=n)
            .map(|j| {
                let ln_pmf = ln_choose(n, j) + j as f64 * ln_q + (n - j) as f64 * ln_b;
                ln_pmf.exp() * (nf / (2.0 * nf - j as f64)).powi(power as i32)
            })
            .sum()
    };
    Ok(NegativeMoment { exact, approx })
}
