//! Domain types: items, groups, bias factors, position discounts and rankings,
//! together with the utility evaluators every solver is judged by.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, invalid, RankError, Result};

/// A candidate with a latent utility and the (possibly empty) set of groups it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: usize,
    #[serde(rename = "w")]
    pub latent_utility: f64,
    #[serde(rename = "groups", default)]
    pub group_memberships: Vec<usize>,
}

impl Item {
    pub fn new(id: usize, latent_utility: f64, group_memberships: Vec<usize>) -> Self {
        Self {
            id,
            latent_utility,
            group_memberships,
        }
    }
}

/// Group membership over `m` items. Groups may overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLayout {
    m: usize,
    members: Vec<Vec<usize>>,
    memberships: Vec<Vec<usize>>,
    disjoint: bool,
}

impl GroupLayout {
    pub fn new(m: usize, members: Vec<Vec<usize>>) -> Result<Self> {
        let mut memberships = vec![Vec::new(); m];
        let mut members = members;
        for (s, group) in members.iter_mut().enumerate() {
            group.sort_unstable();
            if group.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("group {s} lists an item twice")));
            }
            for &i in group.iter() {
                if i >= m {
                    return Err(invalid(format!(
                        "group {s} contains item {i}, but there are only {m} items"
                    )));
                }
                memberships[i].push(s);
            }
        }
        let disjoint = memberships.iter().all(|t| t.len() <= 1);
        Ok(Self {
            m,
            members,
            memberships,
            disjoint,
        })
    }

    /// Two disjoint groups: items `0..m_a` form group 0 and `m_a..m_a+m_b` form group 1.
    pub fn two_groups(m_a: usize, m_b: usize) -> Self {
        let members = vec![(0..m_a).collect(), (m_a..m_a + m_b).collect()];
        Self::new(m_a + m_b, members).expect("contiguous ranges are valid")
    }

    /// Number of groups `p`.
    pub fn p(&self) -> usize {
        self.members.len()
    }

    /// Number of items the layout ranges over.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn members(&self, s: usize) -> &[usize] {
        &self.members[s]
    }

    pub fn all_members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn group_size(&self, s: usize) -> usize {
        self.members[s].len()
    }

    /// Groups containing item `i`, in ascending order.
    pub fn groups_of(&self, i: usize) -> &[usize] {
        &self.memberships[i]
    }

    pub fn is_disjoint(&self) -> bool {
        self.disjoint
    }
}

/// Multiplicative bias factors, one per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasModel {
    betas: Vec<f64>,
}

impl BiasModel {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if let Some(b) = betas.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(invalid(format!("bias factor {b} outside [0, 1]")));
        }
        Ok(Self { betas })
    }

    /// No bias on any of `p` groups.
    pub fn unbiased(p: usize) -> Self {
        Self {
            betas: vec![1.0; p],
        }
    }

    /// Bias `beta` on a single group, all others unbiased.
    pub fn single(p: usize, group: usize, beta: f64) -> Result<Self> {
        let mut betas = vec![1.0; p];
        if group >= p {
            return Err(invalid(format!("group {group} out of range for {p} groups")));
        }
        betas[group] = beta;
        Self::new(betas)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// How a discount vector was generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscountKind {
    Constant,
    /// `v_k = 1 / log_base(k + 1)`.
    Dcg { log_base: f64 },
    /// `v_k = 1 / k`.
    Zipf,
    Custom,
}

/// Nonincreasing, nonnegative position discounts `v_1 >= ... >= v_n >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountVector {
    values: Vec<f64>,
    kind: DiscountKind,
}

impl DiscountVector {
    pub fn constant(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
            kind: DiscountKind::Constant,
        }
    }

    /// DCG discounts with the natural logarithm.
    pub fn dcg(n: usize) -> Self {
        Self::dcg_with_base(n, std::f64::consts::E).expect("e is a valid base")
    }

    pub fn dcg_with_base(n: usize, log_base: f64) -> Result<Self> {
        if !(log_base > 1.0) || !log_base.is_finite() {
            return Err(invalid(format!("DCG log base must be > 1, got {log_base}")));
        }
        let ln_base = if log_base == std::f64::consts::E { 1.0 } else { log_base.ln() };
        let values = (1..=n)
            .map(|k| ln_base / ((k + 1) as f64).ln())
            .collect();
        Ok(Self {
            values,
            kind: DiscountKind::Dcg { log_base },
        })
    }

    pub fn zipf(n: usize) -> Self {
        Self {
            values: (1..=n).map(|k| 1.0 / k as f64).collect(),
            kind: DiscountKind::Zipf,
        }
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("discount entry {v} is not a finite nonnegative number")));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("discount vector must be nonincreasing"));
        }
        Ok(Self {
            values,
            kind: DiscountKind::Custom,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> DiscountKind {
        self.kind
    }

    /// The same kind of discount, regenerated for `n` positions.
    pub fn resized(&self, n: usize) -> Result<Self> {
        match self.kind {
            DiscountKind::Constant => Ok(Self::constant(n)),
            DiscountKind::Dcg { log_base } => Self::dcg_with_base(n, log_base),
            DiscountKind::Zipf => Ok(Self::zipf(n)),
            DiscountKind::Custom if n == self.len() => Ok(self.clone()),
            DiscountKind::Custom => Err(invalid(format!(
                "custom discount has {} entries, cannot resize to {n}",
                self.len()
            ))),
        }
    }

    pub fn diagnostics(&self) -> DiscountDiagnostics {
        validate_discount(&self.values)
    }
}

/// Serialized form of a discount vector; `n` comes from the enclosing document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl DiscountSpec {
    pub fn constant() -> Self {
        Self {
            kind: "constant".into(),
            log_base: None,
            values: None,
        }
    }

    pub fn dcg() -> Self {
        Self {
            kind: "dcg".into(),
            log_base: None,
            values: None,
        }
    }

    pub fn build(&self, n: usize) -> Result<DiscountVector> {
        match self.kind.as_str() {
            "constant" => Ok(DiscountVector::constant(n)),
            "dcg" => DiscountVector::dcg_with_base(n, self.log_base.unwrap_or(std::f64::consts::E)),
            "zipf" => Ok(DiscountVector::zipf(n)),
            "custom" => {
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| invalid("custom discount requires \"values\""))?;
                ensure_len("custom discount values", n, values.len())?;
                DiscountVector::custom(values)
            }
            other => Err(invalid(format!("unknown discount kind {other:?}"))),
        }
    }
}

impl From<&DiscountVector> for DiscountSpec {
    fn from(v: &DiscountVector) -> Self {
        match v.kind {
            DiscountKind::Constant => DiscountSpec::constant(),
            DiscountKind::Dcg { log_base } => DiscountSpec {
                kind: "dcg".into(),
                log_base: (log_base != std::f64::consts::E).then_some(log_base),
                values: None,
            },
            DiscountKind::Zipf => DiscountSpec {
                kind: "zipf".into(),
                log_base: None,
                values: None,
            },
            DiscountKind::Custom => DiscountSpec {
                kind: "custom".into(),
                log_base: None,
                values: Some(v.values.clone()),
            },
        }
    }
}

/// The ranking problem: rank `n` of the `m` items under discount `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    items: Vec<Item>,
    groups: GroupLayout,
    n: usize,
    discount: DiscountVector,
}

impl Instance {
    pub fn new(items: Vec<Item>, groups: GroupLayout, n: usize, discount: DiscountVector) -> Result<Self> {
        let m = items.len();
        if n == 0 || n > m {
            return Err(invalid(format!("need 1 <= n <= m, got n = {n}, m = {m}")));
        }
        ensure_len("discount vector", n, discount.len())?;
        ensure_len("group layout items", m, groups.m())?;
        for (idx, item) in items.iter().enumerate() {
            if item.id != idx {
                return Err(invalid(format!(
                    "item ids must be dense and ordered: position {idx} holds id {}",
                    item.id
                )));
            }
            if !item.latent_utility.is_finite() {
                return Err(invalid(format!("item {idx} has non-finite utility")));
            }
            let mut listed = item.group_memberships.clone();
            listed.sort_unstable();
            listed.dedup();
            if listed != groups.groups_of(idx) {
                return Err(invalid(format!(
                    "item {idx} lists groups {:?} but the group layout places it in {:?}",
                    item.group_memberships,
                    groups.groups_of(idx)
                )));
            }
        }
        Ok(Self {
            items,
            groups,
            n,
            discount,
        })
    }

    /// Builds items from a utility vector; memberships are taken from `groups`.
    pub fn from_utilities(weights: &[f64], groups: GroupLayout, n: usize, discount: DiscountVector) -> Result<Self> {
        ensure_len("utilities", groups.m(), weights.len())?;
        let items = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Item::new(i, w, groups.groups_of(i).to_vec()))
            .collect();
        Self::new(items, groups, n, discount)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &GroupLayout {
        &self.groups
    }

    pub fn discount(&self) -> &DiscountVector {
        &self.discount
    }

    pub fn latent_utilities(&self) -> Vec<f64> {
        self.items.iter().map(|it| it.latent_utility).collect()
    }

    /// Same items and groups with different latent utilities.
    pub fn with_utilities(&self, weights: &[f64]) -> Result<Self> {
        Self::from_utilities(weights, self.groups.clone(), self.n, self.discount.clone())
    }
}

/// JSON document for an [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub n: usize,
    pub v: DiscountSpec,
    pub groups: Vec<Vec<usize>>,
    pub items: Vec<Item>,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = RankError;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let groups = GroupLayout::new(doc.items.len(), doc.groups)?;
        let discount = doc.v.build(doc.n)?;
        Instance::new(doc.items, groups, doc.n, discount)
    }
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        InstanceDoc {
            n: inst.n,
            v: DiscountSpec::from(&inst.discount),
            groups: inst.groups.all_members().to_vec(),
            items: inst.items.clone(),
        }
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| RankError::Parse(e.to_string()))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceDoc::from(self)).expect("instance serializes")
    }
}

/// An injective assignment of items to positions: `positions[j]` is the item at position `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking {
    positions: Vec<usize>,
}

impl Ranking {
    /// Validates that `positions` are distinct ids below `m`.
    pub fn new(positions: Vec<usize>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for &i in &positions {
            if i >= m {
                return Err(invalid(format!("ranking refers to item {i}, but m = {m}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(invalid(format!("item {i} placed twice")));
            }
        }
        Ok(Self { positions })
    }

    pub(crate) fn from_unchecked(positions: Vec<usize>) -> Self {
        Self { positions }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.positions
    }
}

/// `ŵ_i = w_i · ∏_{s ∈ T_i} β_s`.
pub fn observed_utilities(instance: &Instance, bias: &BiasModel) -> Result<Vec<f64>> {
    ensure_len("bias factors", instance.groups().p(), bias.betas().len())?;
    Ok(instance
        .items()
        .iter()
        .map(|item| {
            instance
                .groups()
                .groups_of(item.id)
                .iter()
                .fold(item.latent_utility, |acc, &s| acc * bias.betas()[s])
        })
        .collect())
}

/// `Σ_j weights[positions[j]] · v_j`.
pub fn ranking_utility(ranking: &Ranking, v: &DiscountVector, weights: &[f64]) -> Result<f64> {
    ensure_len("ranking length vs discount", v.len(), ranking.len())?;
    if let Some(&i) = ranking.positions().iter().find(|&&i| i >= weights.len()) {
        return Err(invalid(format!(
            "ranking refers to item {i}, but only {} weights were given",
            weights.len()
        )));
    }
    Ok(ranking
        .positions()
        .iter()
        .zip(v.values())
        .map(|(&i, &vj)| weights[i] * vj)
        .sum())
}

/// Shape checks on a discount vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscountDiagnostics {
    pub nonincreasing: bool,
    /// `v_k − v_{k+1} >= v_{k+1} − v_{k+2}` for every k; vacuously true for n < 3.
    pub convex_differences: bool,
    /// `(v_1 − v_n) / Σ v_k`; zero for an empty or all-zero vector.
    pub assumption_ratio: f64,
}

pub fn validate_discount(v: &[f64]) -> DiscountDiagnostics {
    let nonincreasing = v.windows(2).all(|w| w[0] >= w[1]);
    // small slack so exact-arithmetic equalities survive rounding
    let convex_differences = v
        .windows(3)
        .all(|w| (w[0] - w[1]) - (w[1] - w[2]) >= -1e-12);
    let total: f64 = v.iter().sum();
    let assumption_ratio = match (v.first(), v.last()) {
        (Some(first), Some(last)) if total != 0.0 => (first - last) / total,
        _ => 0.0,
    };
    DiscountDiagnostics {
        nonincreasing,
        convex_differences,
        assumption_ratio,
    }
}

/// Entry `[k][s]` counts members of group `s` among positions `1..=k+1`.
pub fn prefix_group_counts(ranking: &Ranking, groups: &GroupLayout) -> Vec<Vec<usize>> {
    let p = groups.p();
    let mut running = vec![0usize; p];
    ranking
        .positions()
        .iter()
        .map(|&i| {
            if i < groups.m() {
                for &s in groups.groups_of(i) {
                    running[s] += 1;
                }
            }
            running.clone()
        })
        .collect()
}
