//! Monte Carlo comparisons of constrained, unconstrained and latent-optimal rankings.
//!
//! Every trial draws its utilities from its own stream, seeded from
//! `(master_seed, trial_index)`; sweeps reuse the same trial streams in every
//! (α, β) cell. Trials run on the current rayon pool and results are reduced in
//! trial order, so the output does not depend on the number of threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{descending_order, simple_constraints, ConstraintMatrix};
use crate::error::{invalid, RankError, Result};
use crate::model::{ranking_utility, DiscountSpec, DiscountVector, GroupLayout, Instance, Ranking};
use crate::solver::{rank_constrained_greedy, rank_unconstrained};
use crate::stats::{mean_and_stderr, Distribution, SeedSpec};

fn default_target() -> usize {
    1
}

/// One two-group ranking experiment. Group 0 ("a") holds items `0..m_a`,
/// group 1 ("b") holds the next `m_b`; `beta` shades the target group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub m_a: usize,
    pub m_b: usize,
    pub n: usize,
    pub beta: f64,
    #[serde(default)]
    pub alpha: f64,
    pub dist_a: Distribution,
    pub dist_b: Distribution,
    #[serde(default = "DiscountSpec::constant")]
    pub discount: DiscountSpec,
    #[serde(default = "default_target")]
    pub target_group: usize,
}

impl TrialConfig {
    /// Both groups `U[0, 1]`, constant discount, bias on group b.
    pub fn uniform(m_a: usize, m_b: usize, n: usize, beta: f64, alpha: f64) -> Self {
        Self {
            m_a,
            m_b,
            n,
            beta,
            alpha,
            dist_a: Distribution::standard_uniform(),
            dist_b: Distribution::standard_uniform(),
            discount: DiscountSpec::constant(),
            target_group: 1,
        }
    }

    pub fn with_discount(mut self, discount: DiscountSpec) -> Self {
        self.discount = discount;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > self.m_a + self.m_b {
            return Err(invalid(format!(
                "need 1 <= n <= m_a + m_b, got n = {}, m_a + m_b = {}",
                self.n,
                self.m_a + self.m_b
            )));
        }
        check_unit("beta", self.beta)?;
        check_unit("alpha", self.alpha)?;
        if self.target_group > 1 {
            return Err(invalid(format!("target group must be 0 or 1, got {}", self.target_group)));
        }
        self.dist_a.validate()?;
        self.dist_b.validate()?;
        self.discount.build(self.n)?;
        Ok(())
    }

    fn target_size(&self) -> usize {
        if self.target_group == 0 {
            self.m_a
        } else {
            self.m_b
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// Latent utilities of the three rankings in one trial, plus target-group counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub u_cons: f64,
    pub u_uncons: f64,
    pub u_opt: f64,
    pub n_b_cons: usize,
    pub n_b_uncons: usize,
}

/// Per-config state reused across trials.
struct Prepared<'a> {
    config: &'a TrialConfig,
    template: Instance,
}

impl<'a> Prepared<'a> {
    fn new(config: &'a TrialConfig) -> Result<Self> {
        config.validate()?;
        let groups = GroupLayout::two_groups(config.m_a, config.m_b);
        let discount = config.discount.build(config.n)?;
        let zeros = vec![0.0; config.m_a + config.m_b];
        let template = Instance::from_utilities(&zeros, groups, config.n, discount)?;
        Ok(Self { config, template })
    }

    fn constraints(&self, alpha: f64) -> Result<ConstraintMatrix> {
        let c = self.config;
        let l = simple_constraints(alpha, c.target_group, c.n, 2)?;
        let needed = l.bound(c.n, c.target_group);
        if needed > c.target_size() {
            return Err(RankError::Infeasible(format!(
                "alpha = {alpha} needs {needed} target-group items, only {} exist",
                c.target_size()
            )));
        }
        Ok(l)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let c = self.config;
        let mut w = Vec::with_capacity(c.m_a + c.m_b);
        c.dist_a.sample_into(c.m_a, rng, &mut w)?;
        c.dist_b.sample_into(c.m_b, rng, &mut w)?;
        Ok(w)
    }

    fn observed(&self, w: &[f64], beta: f64) -> Vec<f64> {
        let target = self.template.groups().members(self.config.target_group);
        let mut obs = w.to_vec();
        for &i in target {
            obs[i] *= beta;
        }
        obs
    }

    fn latent(&self, ranking: &Ranking, w: &[f64]) -> Result<f64> {
        ranking_utility(ranking, self.template.discount(), w)
    }

    fn target_count(&self, ranking: &Ranking) -> usize {
        let target = self.config.target_group;
        ranking
            .positions()
            .iter()
            .filter(|&&i| self.template.groups().groups_of(i).contains(&target))
            .count()
    }
}

/// One trial of the CONS / UNCONS / OPT comparison.
pub fn run_trial(config: &TrialConfig, trial_index: u64, seed: &SeedSpec) -> Result<TrialReport> {
    let prep = Prepared::new(config)?;
    let l = prep.constraints(config.alpha)?;
    let w = prep.draw(&mut seed.trial_rng(trial_index))?;
    let obs = prep.observed(&w, config.beta);
    let opt = rank_unconstrained(&prep.template, &w)?;
    let uncons = rank_unconstrained(&prep.template, &obs)?;
    let cons = rank_constrained_greedy(&prep.template, &obs, &l)?;
    Ok(TrialReport {
        u_cons: prep.latent(&cons, &w)?,
        u_uncons: prep.latent(&uncons, &w)?,
        u_opt: prep.latent(&opt, &w)?,
        n_b_cons: prep.target_count(&cons),
        n_b_uncons: prep.target_count(&uncons),
    })
}

/// Trials `0..trials`, in order.
pub fn run_trials(config: &TrialConfig, trials: u64, seed: &SeedSpec) -> Result<Vec<TrialReport>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(config, t, seed))
        .collect()
}

/// One (α, β) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub m_a: usize,
    pub m_b: usize,
    pub n: usize,
    pub trials: u64,
    pub mean_cons: f64,
    pub se_cons: f64,
    pub mean_uncons: f64,
    pub se_uncons: f64,
    pub mean_opt: f64,
    pub se_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// β-major, then α, in the order given to [`run_sweep`].
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str =
    "alpha,beta,m_a,m_b,n,trials,mean_cons,se_cons,mean_uncons,se_uncons,mean_opt,se_opt";

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.alpha,
                r.beta,
                r.m_a,
                r.m_b,
                r.n,
                r.trials,
                r.mean_cons,
                r.se_cons,
                r.mean_uncons,
                r.se_uncons,
                r.mean_opt,
                r.se_opt
            ));
        }
        out
    }

    pub fn rows_for_beta(&self, beta: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.beta == beta)
    }
}

/// Mean latent utilities over an α × β grid. `base.alpha` and `base.beta` are ignored.
pub fn run_sweep(base: &TrialConfig, alphas: &[f64], betas: &[f64], trials: u64, seed: &SeedSpec) -> Result<SweepReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if alphas.is_empty() || betas.is_empty() {
        return Err(invalid("sweep needs at least one alpha and one beta"));
    }
    for &b in betas {
        check_unit("beta", b)?;
    }
    let prep = Prepared::new(base)?;
    let constraints: Vec<ConstraintMatrix> = alphas.iter().map(|&a| prep.constraints(a)).collect::<Result<_>>()?;

    // per trial: [cons, uncons, opt] for every cell, β-major
    let per_trial: Vec<Vec<[f64; 3]>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let w = prep.draw(&mut seed.trial_rng(t))?;
            let u_opt = prep.latent(&rank_unconstrained(&prep.template, &w)?, &w)?;
            let mut cells = Vec::with_capacity(alphas.len() * betas.len());
            for &beta in betas {
                let obs = prep.observed(&w, beta);
                let u_uncons = prep.latent(&rank_unconstrained(&prep.template, &obs)?, &w)?;
                for l in &constraints {
                    let cons = if l.is_zero() {
                        u_uncons
                    } else {
                        prep.latent(&rank_constrained_greedy(&prep.template, &obs, l)?, &w)?
                    };
                    cells.push([cons, u_uncons, u_opt]);
                }
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(alphas.len() * betas.len());
    let mut cell = 0;
    for &beta in betas {
        for &alpha in alphas {
            let column = |which: usize| -> (f64, f64) {
                let xs: Vec<f64> = per_trial.iter().map(|cells| cells[cell][which]).collect();
                mean_and_stderr(&xs)
            };
            let (mean_cons, se_cons) = column(0);
            let (mean_uncons, se_uncons) = column(1);
            let (mean_opt, se_opt) = column(2);
            rows.push(SweepRow {
                alpha,
                beta,
                m_a: base.m_a,
                m_b: base.m_b,
                n: base.n,
                trials,
                mean_cons,
                se_cons,
                mean_uncons,
                se_uncons,
                mean_opt,
                se_opt,
            });
            cell += 1;
        }
    }
    Ok(SweepReport { rows })
}

/// Evenly spaced grid `start, start + step, ..., stop` (inclusive, rounded to 12 decimals).
pub fn alpha_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(invalid(format!("bad grid: start = {start}, stop = {stop}, step = {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Monte Carlo estimates of `E[N_kb]` and `E[P_ℓ]` in the latent-optimal ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStatsEstimate {
    pub trials: u64,
    pub mean_nkb: f64,
    pub se_nkb: f64,
    pub mean_pl: f64,
    pub se_pl: f64,
    /// `nkb_histogram[j]` counts trials with exactly `j` group-b items in the top k.
    pub nkb_histogram: Vec<u64>,
}

impl OrderStatsEstimate {
    /// Fraction of trials with `N_kb <= threshold`.
    pub fn frequency_at_most(&self, threshold: f64) -> f64 {
        let hits: u64 = self
            .nkb_histogram
            .iter()
            .enumerate()
            .filter(|(j, _)| *j as f64 <= threshold)
            .map(|(_, c)| c)
            .sum();
        hits as f64 / self.trials as f64
    }
}

/// Both groups draw from `dist`; items are sorted by utility and the group-b
/// count in the top `k` and the position of the `l`-th group-b item are recorded.
pub fn estimate_order_stats(
    k: usize,
    l: usize,
    m_a: usize,
    m_b: usize,
    dist: &Distribution,
    trials: u64,
    seed: &SeedSpec,
) -> Result<OrderStatsEstimate> {
    if k == 0 || k >= m_a.min(m_b) {
        return Err(invalid(format!("need 1 <= k < min(m_a, m_b), got k = {k}")));
    }
    if l == 0 || l > m_b {
        return Err(invalid(format!("need 1 <= l <= m_b, got l = {l}")));
    }
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    dist.validate()?;
    let samples: Vec<(usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.trial_rng(t);
            let mut w = Vec::with_capacity(m_a + m_b);
            dist.sample_into(m_a + m_b, &mut rng, &mut w)?;
            let order = descending_order(&w);
            let is_b = |i: usize| i >= m_a;
            let nkb = order[..k].iter().filter(|&&i| is_b(i)).count();
            let pl = order
                .iter()
                .enumerate()
                .filter(|(_, &i)| is_b(i))
                .nth(l - 1)
                .map(|(pos, _)| pos + 1)
                .expect("l <= m_b");
            Ok((nkb, pl))
        })
        .collect::<Result<_>>()?;

    let mut histogram = vec![0u64; k + 1];
    for &(nkb, _) in &samples {
        histogram[nkb] += 1;
    }
    let nkb: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let pl: Vec<f64> = samples.iter().map(|s| s.1 as f64).collect();
    let (mean_nkb, se_nkb) = mean_and_stderr(&nkb);
    let (mean_pl, se_pl) = mean_and_stderr(&pl);
    Ok(OrderStatsEstimate {
        trials,
        mean_nkb,
        se_nkb,
        mean_pl,
        se_pl,
        nkb_histogram: histogram,
    })
}

/// `(s + offset) · gamma - offset`, elementwise.
pub fn apply_score_shift(scores: &[f64], gamma: f64, offset: f64) -> Vec<f64> {
    scores.iter().map(|s| (s + offset) * gamma - offset).collect()
}

/// Extra reserved seats `x` solving `n_f + x = alpha · (n + x)`, ceiled and clamped at zero.
pub fn supernumerary_seats(n: usize, n_f: usize, alpha: f64) -> usize {
    let x = (alpha * n as f64 - n_f as f64) / (1.0 - alpha);
    (x - 1e-9).ceil().max(0.0) as usize
}

fn default_offset() -> f64 {
    105.0
}

/// Seat-expansion comparison. Group b's observed scores understate its latent
/// scores by the shift `(s + offset) · gamma - offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupernumeraryConfig {
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    #[serde(default = "default_offset")]
    pub score_offset: f64,
    pub m_a: usize,
    pub m_b: usize,
    pub dist_a: Distribution,
    pub dist_b: Distribution,
}

impl SupernumeraryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 1.0) {
            return Err(invalid(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(invalid(format!("alpha must lie in [0, 1), got {}", self.alpha)));
        }
        if self.n == 0 || self.n > self.m_a + self.m_b {
            return Err(invalid("need 1 <= n <= m_a + m_b"));
        }
        if !self.score_offset.is_finite() {
            return Err(invalid("score offset must be finite"));
        }
        self.dist_a.validate()?;
        self.dist_b.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "CONS")]
    Cons,
    #[serde(rename = "UNCONS")]
    Uncons,
    #[serde(rename = "SUP")]
    Sup,
    #[serde(rename = "CONS_BAR")]
    ConsBar,
    #[serde(rename = "UNCONS_BAR")]
    UnconsBar,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Cons, Scheme::Uncons, Scheme::Sup, Scheme::ConsBar, Scheme::UnconsBar];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Cons => "CONS",
            Scheme::Uncons => "UNCONS",
            Scheme::Sup => "SUP",
            Scheme::ConsBar => "CONS_BAR",
            Scheme::UnconsBar => "UNCONS_BAR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub alpha: f64,
    pub scheme: Scheme,
    /// Mean number of admitted candidates.
    pub seats: f64,
    pub mean_utility_per_seat: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupernumeraryReport {
    pub rows: Vec<SchemeRow>,
}

pub const SUPERNUMERARY_CSV_HEADER: &str = "alpha,scheme,seats,mean_utility_per_seat,se";

impl SupernumeraryReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUPERNUMERARY_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.alpha,
                r.scheme.name(),
                r.seats,
                r.mean_utility_per_seat,
                r.se
            ));
        }
        out
    }

    pub fn row(&self, scheme: Scheme) -> Option<&SchemeRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }
}

/// Per-trial outcome for each scheme: (seats, latent utility per seat).
fn supernumerary_trial(config: &SupernumeraryConfig, groups: &GroupLayout, rng: &mut impl Rng) -> Result<[(usize, f64); 5]> {
    let (m_a, m_b, n) = (config.m_a, config.m_b, config.n);
    let m = m_a + m_b;
    let mut observed = Vec::with_capacity(m);
    config.dist_a.sample_into(m_a, rng, &mut observed)?;
    config.dist_b.sample_into(m_b, rng, &mut observed)?;
    let mut latent = observed.clone();
    let shifted = apply_score_shift(&observed[m_a..], config.gamma, config.score_offset);
    latent[m_a..].copy_from_slice(&shifted);

    let order = descending_order(&observed);
    let n_f = order[..n].iter().filter(|&&i| i >= m_a).count();
    let x = supernumerary_seats(n, n_f, config.alpha);
    let n_sup = n + x;
    if n_sup > m || n_f + x > m_b {
        return Err(invalid(format!(
            "not enough candidates for {n_sup} seats ({} reserved for group b)",
            n_f + x
        )));
    }

    let per_seat = |admitted: &[usize]| admitted.iter().map(|&i| latent[i]).sum::<f64>() / admitted.len() as f64;

    let constrained = |seats: usize| -> Result<Vec<usize>> {
        let template = Instance::from_utilities(&observed, groups.clone(), seats, DiscountVector::constant(seats))?;
        let l = simple_constraints(config.alpha, 1, seats, 2)?;
        Ok(rank_constrained_greedy(&template, &observed, &l)?.into_inner())
    };

    // reserved seats go to the best group-b candidates first; neutral seats to the best of the rest
    let reserved: Vec<usize> = order.iter().copied().filter(|&i| i >= m_a).take(n_f + x).collect();
    let mut taken = vec![false; m];
    for &i in &reserved {
        taken[i] = true;
    }
    let mut sup = reserved;
    sup.extend(order.iter().copied().filter(|&i| !taken[i]).take(n - n_f));

    let cons = constrained(n)?;
    let cons_bar = constrained(n_sup)?;
    Ok([
        (n, per_seat(&cons)),
        (n, per_seat(&order[..n])),
        (sup.len(), per_seat(&sup)),
        (n_sup, per_seat(&cons_bar)),
        (n_sup, per_seat(&order[..n_sup])),
    ])
}

/// Mean latent utility per admitted candidate under each admission scheme.
pub fn supernumerary_compare(config: &SupernumeraryConfig, trials: u64, seed: &SeedSpec) -> Result<SupernumeraryReport> {
    config.validate()?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let groups = GroupLayout::two_groups(config.m_a, config.m_b);
    let outcomes: Vec<[(usize, f64); 5]> = (0..trials)
        .into_par_iter()
        .map(|t| supernumerary_trial(config, &groups, &mut seed.trial_rng(t)))
        .collect::<Result<_>>()?;
    let rows = Scheme::ALL
        .iter()
        .enumerate()
        .map(|(idx, &scheme)| {
            let seats = outcomes.iter().map(|o| o[idx].0 as f64).sum::<f64>() / trials as f64;
            let utils: Vec<f64> = outcomes.iter().map(|o| o[idx].1).collect();
            let (mean, se) = mean_and_stderr(&utils);
            SchemeRow {
                alpha: config.alpha,
                scheme,
                seats,
                mean_utility_per_seat: mean,
                se,
            }
        })
        .collect();
    Ok(SupernumeraryReport { rows })
}
