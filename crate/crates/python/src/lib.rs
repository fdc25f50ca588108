//! Python bindings for the `fairrank` ranking engine.
//!
//! Configurations for the Monte Carlo entry points are passed as JSON strings
//! using the same schemas as the command-line tool.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fairrank_core as fr;
use fr::experiments::{self, SupernumeraryConfig, TrialConfig};
use fr::model::{DiscountSpec, DiscountVector, GroupLayout};
use fr::stats::{self, Distribution, SeedSpec};
use fr::RankError;

create_exception!(fairrank, InfeasibleError, PyValueError);

fn to_py(e: RankError) -> PyErr {
    match e {
        RankError::Infeasible(msg) => InfeasibleError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: for<'de> serde::Deserialize<'de>>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("bad JSON: {e}")))
}

/// A ranking problem: items with latent utilities, groups, and position discounts.
#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: fr::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (weights, groups, n, discount = "constant", log_base = None, values = None))]
    fn new(
        weights: Vec<f64>,
        groups: Vec<Vec<usize>>,
        n: usize,
        discount: &str,
        log_base: Option<f64>,
        values: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let layout = GroupLayout::new(weights.len(), groups).map_err(to_py)?;
        let spec = DiscountSpec {
            kind: discount.to_string(),
            log_base,
            values,
        };
        let v = spec.build(n).map_err(to_py)?;
        let inner = fr::Instance::from_utilities(&weights, layout, n, v).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: fr::Instance::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.groups().p()
    }

    #[getter]
    fn latent_utilities(&self) -> Vec<f64> {
        self.inner.latent_utilities()
    }

    #[getter]
    fn discount(&self) -> Vec<f64> {
        self.inner.discount().values().to_vec()
    }

    #[getter]
    fn groups(&self) -> Vec<Vec<usize>> {
        self.inner.groups().all_members().to_vec()
    }

    #[getter]
    fn is_disjoint(&self) -> bool {
        self.inner.groups().is_disjoint()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(m={}, n={}, p={})",
            self.inner.m(),
            self.inner.n(),
            self.inner.groups().p()
        )
    }
}

/// Prefix lower bounds; `rows[k-1][s]` is the minimum count of group `s` in the top k.
#[pyclass(name = "ConstraintMatrix", frozen)]
struct PyConstraintMatrix {
    inner: fr::ConstraintMatrix,
}

#[pymethods]
impl PyConstraintMatrix {
    #[new]
    fn new(rows: Vec<Vec<usize>>, p: usize) -> PyResult<Self> {
        Ok(Self {
            inner: fr::ConstraintMatrix::new(rows, p).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn zeros(n: usize, p: usize) -> Self {
        Self {
            inner: fr::ConstraintMatrix::zeros(n, p),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: fr::ConstraintMatrix::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<usize>> {
        self.inner.rows().to_vec()
    }

    fn column(&self, s: usize) -> PyResult<Vec<usize>> {
        if s >= self.inner.p() {
            return Err(PyValueError::new_err(format!("group {s} out of range")));
        }
        Ok(self.inner.column(s))
    }

    fn __repr__(&self) -> String {
        format!("ConstraintMatrix(n={}, p={})", self.inner.n(), self.inner.p())
    }
}

fn ranking(instance: &PyInstance, positions: Vec<usize>) -> PyResult<fr::Ranking> {
    fr::Ranking::new(positions, instance.inner.m()).map_err(to_py)
}

#[pyfunction]
fn observed_utilities(instance: &PyInstance, betas: Vec<f64>) -> PyResult<Vec<f64>> {
    let bias = fr::BiasModel::new(betas).map_err(to_py)?;
    fr::observed_utilities(&instance.inner, &bias).map_err(to_py)
}

/// Discounted utility of `ranking` (a list of item ids) under `discount` and `weights`.
#[pyfunction]
fn ranking_utility(ranking: Vec<usize>, discount: Vec<f64>, weights: Vec<f64>) -> PyResult<f64> {
    let r = fr::Ranking::new(ranking, weights.len()).map_err(to_py)?;
    let v = DiscountVector::custom(discount).map_err(to_py)?;
    fr::ranking_utility(&r, &v, &weights).map_err(to_py)
}

/// `(nonincreasing, convex_differences, assumption_ratio)`.
#[pyfunction]
fn validate_discount(values: Vec<f64>) -> (bool, bool, f64) {
    let d = fr::validate_discount(&values);
    (d.nonincreasing, d.convex_differences, d.assumption_ratio)
}

#[pyfunction]
fn prefix_group_counts(instance: &PyInstance, ranking_ids: Vec<usize>) -> PyResult<Vec<Vec<usize>>> {
    let r = ranking(instance, ranking_ids)?;
    Ok(fr::prefix_group_counts(&r, instance.inner.groups()))
}

#[pyfunction]
fn simple_constraints(alpha: f64, target_group: usize, n: usize, p: usize) -> PyResult<PyConstraintMatrix> {
    Ok(PyConstraintMatrix {
        inner: fr::simple_constraints(alpha, target_group, n, p).map_err(to_py)?,
    })
}

#[pyfunction]
fn derived_constraints(instance: &PyInstance) -> PyConstraintMatrix {
    PyConstraintMatrix {
        inner: fr::derived_constraints(&instance.inner),
    }
}

#[pyfunction]
fn satisfies(instance: &PyInstance, ranking_ids: Vec<usize>, constraints: &PyConstraintMatrix) -> PyResult<bool> {
    let r = ranking(instance, ranking_ids)?;
    fr::satisfies(&r, &constraints.inner, instance.inner.groups()).map_err(to_py)
}

#[pyfunction]
fn check_feasibility(instance: &PyInstance, constraints: &PyConstraintMatrix) -> PyResult<bool> {
    fr::check_feasibility(&constraints.inner, instance.inner.groups(), instance.inner.n()).map_err(to_py)
}

#[pyfunction]
fn rank_unconstrained(instance: &PyInstance, weights: Vec<f64>) -> PyResult<Vec<usize>> {
    Ok(fr::rank_unconstrained(&instance.inner, &weights)
        .map_err(to_py)?
        .into_inner())
}

/// `solver` is one of `"auto"`, `"greedy"` or `"bruteforce"`.
#[pyfunction]
#[pyo3(signature = (instance, weights, constraints, solver = "auto"))]
fn rank_constrained(
    instance: &PyInstance,
    weights: Vec<f64>,
    constraints: &PyConstraintMatrix,
    solver: &str,
) -> PyResult<Vec<usize>> {
    let (inst, l) = (&instance.inner, &constraints.inner);
    let r = match solver {
        "auto" => fr::rank_constrained(inst, &weights, l),
        "greedy" => fr::rank_constrained_greedy(inst, &weights, l),
        "bruteforce" => fr::rank_constrained_bruteforce(inst, &weights, l),
        other => return Err(PyValueError::new_err(format!("unknown solver {other:?}"))),
    };
    Ok(r.map_err(to_py)?.into_inner())
}

#[pyfunction]
fn expected_nkb(k: u64, m_a: u64, m_b: u64) -> f64 {
    stats::expected_nkb(k, m_a, m_b)
}

#[pyfunction]
fn expected_pl(l: u64, m_a: u64, m_b: u64) -> PyResult<f64> {
    stats::expected_pl(l, m_a, m_b).map_err(to_py)
}

#[pyfunction]
fn pmf_nkb(j: u64, k: u64, m_a: u64, m_b: u64) -> f64 {
    stats::pmf_nkb(j, k, m_a, m_b)
}

#[pyfunction]
fn pmf_pl(k: u64, l: u64, m_a: u64, m_b: u64) -> f64 {
    stats::pmf_pl(k, l, m_a, m_b)
}

#[pyfunction]
fn tail_bound_nkb(delta: f64, k: u64) -> PyResult<f64> {
    stats::tail_bound_nkb(delta, k).map_err(to_py)
}

/// `(exact, approx)`.
#[pyfunction]
fn binomial_negative_moment(n: u64, beta: f64, power: u32) -> PyResult<(f64, f64)> {
    let m = stats::binomial_negative_moment(n, beta, power).map_err(to_py)?;
    Ok((m.exact, m.approx))
}

#[pyfunction]
fn utility_with_constraints_formula(n: u64, m_a: u64, m_b: u64) -> PyResult<f64> {
    stats::utility_with_constraints_formula(n, m_a, m_b).map_err(to_py)
}

/// `(value, branch)` with branch one of `biased_regime`, `saturated_regime`, `gap`.
#[pyfunction]
fn utility_without_constraints_formula(n: u64, m_a: u64, m_b: u64, beta: f64) -> PyResult<(f64, String)> {
    let u = stats::utility_without_constraints_formula(n, m_a, m_b, beta).map_err(to_py)?;
    let branch = serde_json::to_value(u.branch)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    Ok((u.value, branch))
}

/// Draws `count` values from a distribution given as JSON.
#[pyfunction]
fn sample(dist_json: &str, count: usize, seed: u64) -> PyResult<Vec<f64>> {
    let dist: Distribution = parse(dist_json)?;
    dist.sample(count, &mut SeedSpec::new(seed).trial_rng(0)).map_err(to_py)
}

#[pyclass(name = "TrialReport", get_all, frozen)]
struct PyTrialReport {
    u_cons: f64,
    u_uncons: f64,
    u_opt: f64,
    n_b_cons: usize,
    n_b_uncons: usize,
}

#[pymethods]
impl PyTrialReport {
    fn __repr__(&self) -> String {
        format!(
            "TrialReport(u_cons={}, u_uncons={}, u_opt={}, n_b_cons={}, n_b_uncons={})",
            self.u_cons, self.u_uncons, self.u_opt, self.n_b_cons, self.n_b_uncons
        )
    }
}

#[pyfunction]
#[pyo3(signature = (config_json, trial_index = 0, seed = 0))]
fn run_trial(config_json: &str, trial_index: u64, seed: u64) -> PyResult<PyTrialReport> {
    let cfg: TrialConfig = parse(config_json)?;
    let r = experiments::run_trial(&cfg, trial_index, &SeedSpec::new(seed)).map_err(to_py)?;
    Ok(PyTrialReport {
        u_cons: r.u_cons,
        u_uncons: r.u_uncons,
        u_opt: r.u_opt,
        n_b_cons: r.n_b_cons,
        n_b_uncons: r.n_b_uncons,
    })
}

/// Runs an α × β sweep and returns the report as CSV text.
#[pyfunction]
#[pyo3(signature = (config_json, alphas, betas, trials, seed = 0))]
fn run_sweep(py: Python<'_>, config_json: &str, alphas: Vec<f64>, betas: Vec<f64>, trials: u64, seed: u64) -> PyResult<String> {
    let cfg: TrialConfig = parse(config_json)?;
    let report = py
        .detach(|| experiments::run_sweep(&cfg, &alphas, &betas, trials, &SeedSpec::new(seed)))
        .map_err(to_py)?;
    Ok(report.to_csv())
}

/// `(mean_nkb, se_nkb, mean_pl, se_pl)`.
#[pyfunction]
#[pyo3(signature = (k, l, m_a, m_b, trials, dist_json = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn estimate_order_stats(
    py: Python<'_>,
    k: usize,
    l: usize,
    m_a: usize,
    m_b: usize,
    trials: u64,
    dist_json: Option<&str>,
    seed: u64,
) -> PyResult<(f64, f64, f64, f64)> {
    let dist = match dist_json {
        Some(text) => parse(text)?,
        None => Distribution::standard_uniform(),
    };
    let est = py
        .detach(|| experiments::estimate_order_stats(k, l, m_a, m_b, &dist, trials, &SeedSpec::new(seed)))
        .map_err(to_py)?;
    Ok((est.mean_nkb, est.se_nkb, est.mean_pl, est.se_pl))
}

#[pyfunction]
#[pyo3(signature = (scores, gamma, offset = 105.0))]
fn apply_score_shift(scores: Vec<f64>, gamma: f64, offset: f64) -> Vec<f64> {
    experiments::apply_score_shift(&scores, gamma, offset)
}

/// Runs the seat-expansion comparison and returns CSV text.
#[pyfunction]
#[pyo3(signature = (config_json, trials, seed = 0))]
fn supernumerary_compare(py: Python<'_>, config_json: &str, trials: u64, seed: u64) -> PyResult<String> {
    let cfg: SupernumeraryConfig = parse(config_json)?;
    let report = py
        .detach(|| experiments::supernumerary_compare(&cfg, trials, &SeedSpec::new(seed)))
        .map_err(to_py)?;
    Ok(report.to_csv())
}

#[pymodule]
#[pyo3(name = "fairrank")]
fn fairrank_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyConstraintMatrix>()?;
    m.add_class::<PyTrialReport>()?;
    m.add_function(wrap_pyfunction!(observed_utilities, m)?)?;
    m.add_function(wrap_pyfunction!(ranking_utility, m)?)?;
    m.add_function(wrap_pyfunction!(validate_discount, m)?)?;
    m.add_function(wrap_pyfunction!(prefix_group_counts, m)?)?;
    m.add_function(wrap_pyfunction!(simple_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(derived_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(satisfies, m)?)?;
    m.add_function(wrap_pyfunction!(check_feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(rank_unconstrained, m)?)?;
    m.add_function(wrap_pyfunction!(rank_constrained, m)?)?;
    m.add_function(wrap_pyfunction!(expected_nkb, m)?)?;
    m.add_function(wrap_pyfunction!(expected_pl, m)?)?;
    m.add_function(wrap_pyfunction!(pmf_nkb, m)?)?;
    m.add_function(wrap_pyfunction!(pmf_pl, m)?)?;
    m.add_function(wrap_pyfunction!(tail_bound_nkb, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_negative_moment, m)?)?;
    m.add_function(wrap_pyfunction!(utility_with_constraints_formula, m)?)?;
    m.add_function(wrap_pyfunction!(utility_without_constraints_formula, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_order_stats, m)?)?;
    m.add_function(wrap_pyfunction!(apply_score_shift, m)?)?;
    m.add_function(wrap_pyfunction!(supernumerary_compare, m)?)?;
    Ok(())
}
