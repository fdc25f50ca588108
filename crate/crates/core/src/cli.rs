//! The `fairrank` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 infeasible constraints,
//! 3 I/O or parse error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constraints::{derived_constraints, satisfies, ConstraintMatrix};
use crate::error::RankError;
use crate::experiments::{
    alpha_grid, estimate_order_stats, run_sweep, run_trials, supernumerary_compare, SupernumeraryConfig,
    SupernumeraryReport, TrialConfig, SUPERNUMERARY_CSV_HEADER,
};
use crate::model::{observed_utilities, ranking_utility, BiasModel, Instance};
use crate::solver::{rank_constrained_bruteforce, rank_constrained_greedy, rank_unconstrained};
use crate::stats::{expected_nkb, expected_pl, mean_and_stderr, pmf_nkb, tail_bound_nkb, Distribution, SeedSpec};

#[derive(Debug, Parser)]
#[command(name = "fairrank", version, about = "Constrained ranking under implicit bias")]
struct Cli {
    /// Master seed for every randomized subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of Monte Carlo trials (overrides config files).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    /// Greedy for disjoint groups, exhaustive otherwise.
    Auto,
    Greedy,
    Bruteforce,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank an instance under optional lower-bound constraints.
    Solve {
        /// Instance JSON.
        instance: PathBuf,
        /// Constraint matrix JSON (default: unconstrained).
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Per-group bias factors, comma separated (default: all 1).
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
        solver: SolverChoice,
    },
    /// Emit the constraints derived from the latent-optimal ranking.
    DeriveConstraints { instance: PathBuf },
    /// Run trials of one experiment configuration.
    Simulate { config: PathBuf },
    /// Run an alpha x beta sweep and write CSV.
    Sweep { config: PathBuf },
    /// Compare closed-form order statistics with simulation.
    Orderstats {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m_a: usize,
        #[arg(long)]
        m_b: usize,
        /// Distribution JSON (default: U[0, 1]).
        #[arg(long)]
        dist: Option<PathBuf>,
    },
    /// Compare seat-expansion schemes and write CSV.
    Supernumerary { config: PathBuf },
    /// Turn a `score,group` CSV into empirical distributions.
    Ingest { csv: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Rank(RankError),
    Io { path: PathBuf, source: std::io::Error },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Rank(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        CliError::Rank(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Rank(RankError::Infeasible(_)) => 2,
            CliError::Rank(RankError::Parse(_)) | CliError::Io { .. } => 3,
            CliError::Rank(_) => 1,
        }
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Like [`main`], but writes to `sink` (unless `--out` is given) and returns the error.
pub fn run<I, T>(argv: I, sink: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(cli, sink)
}

fn execute(cli: Cli, sink: &mut dyn Write) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    let seed = SeedSpec::new(cli.seed);
    let text = pool.install(|| dispatch(&cli.command, seed, cli.trials))?;
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => sink.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Rank(RankError::Parse(format!("{}: {e}", path.display()))))
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn dispatch(command: &Command, seed: SeedSpec, trials: Option<u64>) -> Result<String, CliError> {
    match command {
        Command::Solve {
            instance,
            constraints,
            betas,
            solver,
        } => solve(instance, constraints.as_deref(), betas.as_deref(), *solver),
        Command::DeriveConstraints { instance } => {
            let inst = Instance::from_json(&read(instance)?)?;
            let mut s = derived_constraints(&inst).to_json();
            s.push('\n');
            Ok(s)
        }
        Command::Simulate { config } => {
            let cfg: TrialConfig = parse_json(config)?;
            let trials = trials.unwrap_or(1);
            let reports = run_trials(&cfg, trials, &seed)?;
            let mean = |f: fn(&crate::experiments::TrialReport) -> f64| {
                let xs: Vec<f64> = reports.iter().map(f).collect();
                let (m, se) = mean_and_stderr(&xs);
                json!({ "mean": m, "se": se })
            };
            Ok(pretty(&json!({
                "seed": seed.master_seed,
                "trials": trials,
                "config": cfg,
                "summary": {
                    "u_cons": mean(|r| r.u_cons),
                    "u_uncons": mean(|r| r.u_uncons),
                    "u_opt": mean(|r| r.u_opt),
                },
                "reports": reports,
            })))
        }
        Command::Sweep { config } => {
            let file: SweepFile = parse_json(config)?;
            let alphas = file.alphas()?;
            let trials = trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
            let report = run_sweep(&file.base, &alphas, &file.betas, trials, &seed)?;
            Ok(format!("# seed={} trials={trials}\n{}", seed.master_seed, report.to_csv()))
        }
        Command::Orderstats { k, l, m_a, m_b, dist } => {
            let dist = match dist {
                Some(path) => parse_json(path)?,
                None => Distribution::standard_uniform(),
            };
            let trials = trials.unwrap_or(DEFAULT_TRIALS);
            orderstats(*k, *l, *m_a, *m_b, &dist, trials, seed)
        }
        Command::Supernumerary { config } => {
            let file: SupernumeraryFile = parse_json(config)?;
            let trials = trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
            let alphas = file.alphas.clone().unwrap_or_else(|| vec![file.config.alpha]);
            let mut rows = Vec::new();
            for alpha in alphas {
                let cfg = SupernumeraryConfig {
                    alpha,
                    ..file.config.clone()
                };
                rows.extend(supernumerary_compare(&cfg, trials, &seed)?.rows);
            }
            let report = SupernumeraryReport { rows };
            debug_assert!(report.to_csv().starts_with(SUPERNUMERARY_CSV_HEADER));
            Ok(format!("# seed={} trials={trials}\n{}", seed.master_seed, report.to_csv()))
        }
        Command::Ingest { csv } => {
            let scores = ingest_scores(csv)?;
            Ok(pretty(&scores))
        }
    }
}

const DEFAULT_TRIALS: u64 = 1000;

fn solve(
    instance: &Path,
    constraints: Option<&Path>,
    betas: Option<&[f64]>,
    solver: SolverChoice,
) -> Result<String, CliError> {
    let inst = Instance::from_json(&read(instance)?)?;
    let p = inst.groups().p();
    let l = match constraints {
        Some(path) => ConstraintMatrix::from_json(&read(path)?)?,
        None => ConstraintMatrix::zeros(inst.n(), p),
    };
    let bias = match betas {
        Some(b) => BiasModel::new(b.to_vec())?,
        None => BiasModel::unbiased(p),
    };
    let observed = observed_utilities(&inst, &bias)?;
    let latent = inst.latent_utilities();
    let (ranking, used) = match solver {
        SolverChoice::Greedy => (rank_constrained_greedy(&inst, &observed, &l)?, "greedy"),
        SolverChoice::Bruteforce => (rank_constrained_bruteforce(&inst, &observed, &l)?, "bruteforce"),
        SolverChoice::Auto if inst.groups().is_disjoint() => {
            (rank_constrained_greedy(&inst, &observed, &l)?, "greedy")
        }
        SolverChoice::Auto => (rank_constrained_bruteforce(&inst, &observed, &l)?, "bruteforce"),
    };
    let optimal = rank_unconstrained(&inst, &latent)?;
    let v = inst.discount();
    Ok(pretty(&json!({
        "solver": used,
        "ranking": ranking,
        "latent_utility": ranking_utility(&ranking, v, &latent)?,
        "observed_utility": ranking_utility(&ranking, v, &observed)?,
        "satisfies_constraints": satisfies(&ranking, &l, inst.groups())?,
        "latent_optimal_ranking": optimal,
        "latent_optimal_utility": ranking_utility(&optimal, v, &latent)?,
    })))
}

fn orderstats(
    k: usize,
    l: usize,
    m_a: usize,
    m_b: usize,
    dist: &Distribution,
    trials: u64,
    seed: SeedSpec,
) -> Result<String, CliError> {
    let est = estimate_order_stats(k, l, m_a, m_b, dist, trials, &seed)?;
    let (k64, ma, mb) = (k as u64, m_a as u64, m_b as u64);
    let e_nkb = expected_nkb(k64, ma, mb);
    let tails: Vec<_> = [2.0, 3.0]
        .iter()
        .map(|&delta| {
            let threshold = e_nkb - delta;
            let exact: f64 = (0..=k64)
                .filter(|&j| j as f64 <= threshold)
                .map(|j| pmf_nkb(j, k64, ma, mb))
                .sum();
            json!({
                "delta": delta,
                "bound": tail_bound_nkb(delta, k64).ok(),
                "exact": exact,
                "empirical": est.frequency_at_most(threshold),
            })
        })
        .collect();
    Ok(pretty(&json!({
        "seed": seed.master_seed,
        "trials": trials,
        "params": { "k": k, "l": l, "m_a": m_a, "m_b": m_b, "dist": dist },
        "analytic": {
            "expected_nkb": e_nkb,
            "expected_pl": expected_pl(l as u64, ma, mb)?,
            "tails": tails,
        },
        "monte_carlo": est,
    })))
}

#[derive(Debug, Clone, Deserialize)]
struct GridSpec {
    start: f64,
    stop: f64,
    step: f64,
}

/// Sweep configuration file.
#[derive(Debug, Clone, Deserialize)]
struct SweepFile {
    base: TrialConfig,
    #[serde(default)]
    alphas: Option<Vec<f64>>,
    #[serde(default)]
    alpha_grid: Option<GridSpec>,
    betas: Vec<f64>,
    #[serde(default)]
    trials: Option<u64>,
}

impl SweepFile {
    fn alphas(&self) -> Result<Vec<f64>, CliError> {
        match (&self.alphas, &self.alpha_grid) {
            (Some(a), None) => Ok(a.clone()),
            (None, Some(g)) => Ok(alpha_grid(g.start, g.stop, g.step)?),
            _ => Err(CliError::Rank(RankError::Parse(
                "sweep config needs exactly one of \"alphas\" or \"alpha_grid\"".into(),
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct SupernumeraryFile {
    #[serde(flatten)]
    config: SupernumeraryConfig,
    #[serde(default)]
    alphas: Option<Vec<f64>>,
    #[serde(default)]
    trials: Option<u64>,
}

/// Scores of one group read from a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupScores {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestedScores {
    /// In order of first appearance in the file.
    pub groups: Vec<GroupScores>,
}

pub fn ingest_scores(path: &Path) -> Result<IngestedScores, CliError> {
    Ok(parse_scores(&read(path)?)?)
}

/// Parses `score,group` CSV text (header required).
pub fn parse_scores(text: &str) -> Result<IngestedScores, RankError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "score,group" => {}
        _ => return Err(RankError::Parse("line 1: expected header \"score,group\"".into())),
    }
    let mut names: Vec<String> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(score), Some(group), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(RankError::Parse(format!("line {lineno}: expected two fields")));
        };
        let score: f64 = score
            .trim()
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| RankError::Parse(format!("line {lineno}: bad score {score:?}")))?;
        let group = group.trim();
        if group.is_empty() {
            return Err(RankError::Parse(format!("line {lineno}: empty group label")));
        }
        let slot = match names.iter().position(|g| g == group) {
            Some(s) => s,
            None => {
                names.push(group.to_string());
                values.push(Vec::new());
                names.len() - 1
            }
        };
        values[slot].push(score);
    }
    if names.is_empty() {
        return Err(RankError::Parse("no score rows".into()));
    }
    let groups = names
        .into_iter()
        .zip(values)
        .map(|(name, sample)| {
            let count = sample.len();
            let mean = sample.iter().sum::<f64>() / count as f64;
            let stddev = if count > 1 {
                (sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
            } else {
                0.0
            };
            Ok(GroupScores {
                name,
                count,
                mean,
                stddev,
                distribution: Distribution::empirical(sample)?,
            })
        })
        .collect::<Result<_, RankError>>()?;
    Ok(IngestedScores { groups })
}
