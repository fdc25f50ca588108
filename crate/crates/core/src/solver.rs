//! Optimal rankings under nonincreasing position discounts.
//!
//! Three solvers share one tie-breaking rule (descending weight, then ascending
//! item id) so that repeated runs are reproducible:
//!
//! * [`rank_unconstrained`]: sort and truncate.
//! * [`rank_constrained_greedy`]: position-by-position greedy with a deadline
//!   lookahead, for disjoint groups.
//! * [`rank_constrained_bruteforce`]: exhaustive search over ordered n-subsets,
//!   for any group structure on small instances.

use crate::constraints::{check_feasibility, descending_order, ConstraintMatrix};
use crate::error::{ensure_len, RankError, Result};
use crate::model::{Instance, Ranking};

pub const BRUTEFORCE_MAX_M: usize = 10;
pub const BRUTEFORCE_MAX_N: usize = 6;

fn weight_order(a: usize, b: usize, weights: &[f64]) -> std::cmp::Ordering {
    weights[b].total_cmp(&weights[a]).then(a.cmp(&b))
}

/// The `n` heaviest items in descending order. Optimal for any nonincreasing discount.
pub fn rank_unconstrained(instance: &Instance, weights: &[f64]) -> Result<Ranking> {
    ensure_len("weights", instance.m(), weights.len())?;
    let mut order = descending_order(weights);
    order.truncate(instance.n());
    Ok(Ranking::from_unchecked(order))
}

/// Greedy constrained ranking for disjoint groups.
///
/// Position `j` receives the heaviest remaining item whose placement leaves every
/// later prefix bound reachable: for each `k >= j`, the total outstanding demand
/// `Σ_s max(0, L[k][s] - placed_s)` must fit in the `k - j` positions after `j`.
pub fn rank_constrained_greedy(instance: &Instance, weights: &[f64], l: &ConstraintMatrix) -> Result<Ranking> {
    ensure_len("weights", instance.m(), weights.len())?;
    let groups = instance.groups();
    if !groups.is_disjoint() {
        return Err(RankError::Unsupported(
            "greedy solver requires disjoint groups; use the exhaustive solver".into(),
        ));
    }
    let n = instance.n();
    if !check_feasibility(l, groups, n)? {
        return Err(RankError::Infeasible(
            "no ranking satisfies the lower bounds".into(),
        ));
    }
    let p = groups.p();

    // one queue per group plus a final queue for ungrouped items, each sorted best-first
    let mut queues: Vec<Vec<usize>> = vec![Vec::new(); p + 1];
    for i in descending_order(weights) {
        let class = groups.groups_of(i).first().copied().unwrap_or(p);
        queues[class].push(i);
    }
    let mut heads = vec![0usize; p + 1];
    let mut placed = vec![0usize; p];
    let mut positions = Vec::with_capacity(n);
    let mut slack = vec![0isize; n + 1];
    let mut suffix_min = vec![0isize; n + 2];

    for j in 1..=n {
        #[allow(clippy::needless_range_loop)]
        // slack[k] = (k - j) - outstanding demand at prefix k, before filling position j
        for k in j..=n {
            let deficit: usize = l.rows()[k - 1]
                .iter()
                .zip(&placed)
                .map(|(&need, &have)| need.saturating_sub(have))
                .sum();
            slack[k] = (k - j) as isize - deficit as isize;
        }
        suffix_min[n + 1] = isize::MAX;
        for k in (j..=n).rev() {
            suffix_min[k] = suffix_min[k + 1].min(slack[k]);
        }

        let mut candidates: Vec<usize> = (0..=p).filter(|&c| heads[c] < queues[c].len()).collect();
        candidates.sort_by(|&a, &b| weight_order(queues[a][heads[a]], queues[b][heads[b]], weights));
        let class = candidates
            .into_iter()
            .find(|&c| {
                // placing a member of c cuts the demand by one wherever c still owes items
                let first_owed = if c < p {
                    (j..=n).find(|&k| l.bound(k, c) > placed[c]).unwrap_or(n + 1)
                } else {
                    n + 1
                };
                let before = (j..first_owed).all(|k| slack[k] >= 0);
                before && suffix_min[first_owed] >= -1
            })
            .ok_or_else(|| RankError::Infeasible(format!("no feasible item for position {j}")))?;
        positions.push(queues[class][heads[class]]);
        heads[class] += 1;
        if class < p {
            placed[class] += 1;
        }
    }
    Ok(Ranking::from_unchecked(positions))
}

/// Exhaustive constrained argmax, any group structure. Limited to `m <= 10`, `n <= 6`.
///
/// Ties in total weight go to the lexicographically smallest id sequence.
pub fn rank_constrained_bruteforce(instance: &Instance, weights: &[f64], l: &ConstraintMatrix) -> Result<Ranking> {
    let (m, n) = (instance.m(), instance.n());
    if m > BRUTEFORCE_MAX_M || n > BRUTEFORCE_MAX_N {
        return Err(RankError::SizeGuard { m, n });
    }
    ensure_len("weights", m, weights.len())?;
    ensure_len("constraint rows", n, l.n())?;
    ensure_len("groups vs constraint columns", instance.groups().p(), l.p())?;

    let mut search = Exhaustive {
        instance,
        weights,
        l,
        v: instance.discount().values(),
        used: vec![false; m],
        counts: vec![0; l.p()],
        current: Vec::with_capacity(n),
        best: None,
    };
    search.descend(0.0);
    search
        .best
        .map(|(_, positions)| Ranking::from_unchecked(positions))
        .ok_or_else(|| RankError::Infeasible("no ranking satisfies the lower bounds".into()))
}

struct Exhaustive<'a> {
    instance: &'a Instance,
    weights: &'a [f64],
    l: &'a ConstraintMatrix,
    v: &'a [f64],
    used: Vec<bool>,
    counts: Vec<usize>,
    current: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Exhaustive<'_> {
    fn descend(&mut self, value: f64) {
        let depth = self.current.len();
        if depth == self.v.len() {
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, self.current.clone()));
            }
            return;
        }
        let groups = self.instance.groups();
        for i in 0..self.used.len() {
            if self.used[i] {
                continue;
            }
            for &s in groups.groups_of(i) {
                self.counts[s] += 1;
            }
            let prefix_ok = self.l.rows()[depth]
                .iter()
                .zip(&self.counts)
                .all(|(need, have)| have >= need);
            if prefix_ok {
                self.used[i] = true;
                self.current.push(i);
                self.descend(value + self.weights[i] * self.v[depth]);
                self.current.pop();
                self.used[i] = false;
            }
            for &s in groups.groups_of(i) {
                self.counts[s] -= 1;
            }
        }
    }
}

/// Greedy for disjoint groups, exhaustive search otherwise.
pub fn rank_constrained(instance: &Instance, weights: &[f64], l: &ConstraintMatrix) -> Result<Ranking> {
    if instance.groups().is_disjoint() {
        rank_constrained_greedy(instance, weights, l)
    } else {
        rank_constrained_bruteforce(instance, weights, l)
    }
}
