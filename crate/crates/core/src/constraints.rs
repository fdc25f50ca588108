//! Prefix lower-bound constraints: a ranking is feasible for `L` when its top-k
//! holds at least `L[k][s]` members of every group `s`, for every `k`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, invalid, RankError, Result};
use crate::model::{prefix_group_counts, GroupLayout, Instance, Ranking};

/// `n × p` matrix of lower bounds. Row `k - 1` holds the bounds for the top-k prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConstraintDoc", into = "ConstraintDoc")]
pub struct ConstraintMatrix {
    n: usize,
    p: usize,
    rows: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintDoc {
    n: usize,
    p: usize,
    #[serde(rename = "L")]
    rows: Vec<Vec<usize>>,
}

impl TryFrom<ConstraintDoc> for ConstraintMatrix {
    type Error = RankError;

    fn try_from(doc: ConstraintDoc) -> Result<Self> {
        ensure_len("constraint rows", doc.n, doc.rows.len())?;
        for row in &doc.rows {
            ensure_len("constraint row width", doc.p, row.len())?;
        }
        ConstraintMatrix::new(doc.rows, doc.p)
    }
}

impl From<ConstraintMatrix> for ConstraintDoc {
    fn from(l: ConstraintMatrix) -> Self {
        ConstraintDoc {
            n: l.n,
            p: l.p,
            rows: l.rows,
        }
    }
}

impl ConstraintMatrix {
    /// Checks shape, `L[k][s] <= k` and that every column is nondecreasing in `k`.
    pub fn new(rows: Vec<Vec<usize>>, p: usize) -> Result<Self> {
        for (idx, row) in rows.iter().enumerate() {
            ensure_len("constraint row width", p, row.len())?;
            let k = idx + 1;
            if let Some(&bound) = row.iter().find(|&&b| b > k) {
                return Err(invalid(format!(
                    "bound {bound} at prefix {k} exceeds the prefix length"
                )));
            }
        }
        for (idx, pair) in rows.windows(2).enumerate() {
            if pair[0].iter().zip(&pair[1]).any(|(a, b)| b < a) {
                return Err(invalid(format!(
                    "constraint column decreases between prefix {} and {}",
                    idx + 1,
                    idx + 2
                )));
            }
        }
        Ok(Self {
            n: rows.len(),
            p,
            rows,
        })
    }

    /// The all-zero (unconstrained) matrix.
    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            rows: vec![vec![0; p]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Bound on group `s` in the top-`k` prefix (`k` is 1-based).
    pub fn bound(&self, k: usize, s: usize) -> usize {
        self.rows[k - 1][s]
    }

    pub fn column(&self, s: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[s]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|&b| b == 0)
    }

    /// Entrywise `self <= other`.
    pub fn dominated_by(&self, other: &ConstraintMatrix) -> bool {
        self.n == other.n
            && self.p == other.p
            && self
                .rows
                .iter()
                .flatten()
                .zip(other.rows.iter().flatten())
                .all(|(a, b)| a <= b)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RankError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constraint matrix serializes")
    }
}

/// At least `floor(alpha · k)` members of `target_group` in every top-k prefix.
pub fn simple_constraints(alpha: f64, target_group: usize, n: usize, p: usize) -> Result<ConstraintMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if target_group >= p {
        return Err(invalid(format!("target group {target_group} out of range for {p} groups")));
    }
    let rows = (1..=n)
        .map(|k| {
            let mut row = vec![0; p];
            row[target_group] = (alpha * k as f64 + 1e-9).floor() as usize;
            row
        })
        .collect();
    Ok(ConstraintMatrix { n, p, rows })
}

/// Latent-optimal order: descending utility, ties by ascending id.
pub(crate) fn descending_order(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));
    order
}

/// Group counts of the latent-optimal ranking's prefixes, used as lower bounds.
///
/// The latent-optimal ranking satisfies these bounds, and any ranking of the
/// observed utilities that satisfies them recovers the latent optimum.
pub fn derived_constraints(instance: &Instance) -> ConstraintMatrix {
    let order = descending_order(&instance.latent_utilities());
    let top = Ranking::from_unchecked(order.into_iter().take(instance.n()).collect());
    let rows = prefix_group_counts(&top, instance.groups());
    ConstraintMatrix {
        n: instance.n(),
        p: instance.groups().p(),
        rows,
    }
}

pub fn satisfies(ranking: &Ranking, l: &ConstraintMatrix, groups: &GroupLayout) -> Result<bool> {
    ensure_len("ranking length vs constraint rows", l.n(), ranking.len())?;
    ensure_len("groups vs constraint columns", l.p(), groups.p())?;
    let counts = prefix_group_counts(ranking, groups);
    Ok(counts
        .iter()
        .zip(l.rows())
        .all(|(have, need)| have.iter().zip(need).all(|(h, r)| h >= r)))
}

/// Exact feasibility test for disjoint groups.
///
/// Each bound is a unit job with a deadline, so the matrix is satisfiable iff
/// every group has enough members and no prefix demands more than `k` items.
pub fn check_feasibility(l: &ConstraintMatrix, groups: &GroupLayout, n: usize) -> Result<bool> {
    if !groups.is_disjoint() {
        return Err(RankError::Unsupported(
            "feasibility test requires disjoint groups; use the exhaustive solver".into(),
        ));
    }
    ensure_len("constraint rows", n, l.n())?;
    ensure_len("groups vs constraint columns", groups.p(), l.p())?;
    if n > groups.m() {
        return Ok(false);
    }
    let monotone = l
        .rows()
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
    let supply = l
        .rows()
        .iter()
        .all(|row| row.iter().enumerate().all(|(s, &b)| b <= groups.group_size(s)));
    let capacity = l
        .rows()
        .iter()
        .enumerate()
        .all(|(idx, row)| row.iter().sum::<usize>() <= idx + 1);
    Ok(monotone && supply && capacity)
}
