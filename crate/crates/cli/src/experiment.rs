//! Batch experiments: perturbed copies of one skeleton, run under every
//! combination of φ, ε and pivot rule.
//!
//! Each (cell, trial) pair derives its own seed from the base seed, so the
//! reports do not depend on how trials are scheduled across threads. Trial
//! results are merged in trial order.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use brdlab_core::generate::{
    lexicographic_profile, random_explicit_game, random_network_game, random_profile,
    worst_of_k_profile, CostShape, ExplicitShape,
};
use brdlab_core::lemma::Accumulator;
use brdlab_core::smoothing::parameter_rng;
use brdlab_core::{
    brute_force_min_potential, iteration_bound, per_run_cap, perturb, run_brd, BoundQuery,
    BrdConfig, EnumerationBudget, Game64, ModelKind, PerturbationFamily, PerturbationSpec,
    PivotRule, Status, StrategyProfile,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::instance::{load_instance, parse_json, InstanceError, SchemaError};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Schema(SchemaError),
    #[error("invalid config:{}", .0.iter().map(|p| format!("\n  {p}")).collect::<String>())]
    Invalid(Vec<String>),
    #[error("skeleton: {0}")]
    Skeleton(#[from] InstanceError),
    #[error(transparent)]
    Core(#[from] brdlab_core::Error),
}

/// How each trial picks the profile the dynamics start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StartPolicy {
    /// First strategy (or first simple path) for every player.
    #[default]
    Lexicographic,
    RandomUniform,
    /// Highest-potential profile among `k` uniform samples; a cheap stand-in
    /// for an adversarial start.
    AdversarialWorstOfK {
        k: usize,
    },
    /// Global potential minimizer of the perturbed instance, found by
    /// enumeration. Runs started here make no moves.
    PotentialMinimizer,
}

impl FromStr for StartPolicy {
    type Err = String;

    /// `lexicographic`, `random`, `worst_of_k:K` or `potential_minimizer`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lexicographic" => Ok(StartPolicy::Lexicographic),
            "random" | "random_uniform" => Ok(StartPolicy::RandomUniform),
            "potential_minimizer" | "min_potential" => Ok(StartPolicy::PotentialMinimizer),
            _ => match s.strip_prefix("worst_of_k:").map(str::parse) {
                Some(Ok(k)) if k > 0 => Ok(StartPolicy::AdversarialWorstOfK { k }),
                _ => Err(format!(
                    "unknown start `{s}`, expected lexicographic, random, worst_of_k:K or potential_minimizer"
                )),
            },
        }
    }
}

/// Parameters for a randomly generated skeleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Resources; the number of edges for network skeletons.
    pub m: usize,
    #[serde(default = "default_size")]
    pub strategies_per_player: usize,
    #[serde(default = "default_size")]
    pub max_strategy_size: usize,
    /// Total break points, step functions only. Defaults to `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Polynomial degree. Defaults to 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Generate a network game on this many nodes instead of explicit
    /// strategy sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_nodes: Option<usize>,
    /// Generator seed. Defaults to the base seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_size() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkeletonSource {
    /// Instance file; relative paths are resolved against the config file.
    File(PathBuf),
    Generate(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "named")]
    pub model: ModelKind,
    pub skeleton: SkeletonSource,
    pub phis: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(with = "named_list")]
    pub pivots: Vec<PivotRule>,
    pub trials: u64,
    pub base_seed: u64,
    #[serde(with = "named", default = "default_family")]
    pub family: PerturbationFamily,
    #[serde(default)]
    pub start: StartPolicy,
    /// Per-run move limit; defaults to the worst-case cap of the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
}

fn default_family() -> PerturbationFamily {
    PerturbationFamily::UniformLow
}

mod named {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

mod named_list {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(ToString::to_string))
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Vec<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = parse_json(text).map_err(ExperimentError::Schema)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut problems = Vec::new();
        if self.trials == 0 {
            problems.push("trials must be at least 1".to_string());
        }
        for (name, empty) in [
            ("phis", self.phis.is_empty()),
            ("epsilons", self.epsilons.is_empty()),
            ("pivots", self.pivots.is_empty()),
        ] {
            if empty {
                problems.push(format!("{name} must not be empty"));
            }
        }
        for &phi in &self.phis {
            if !(phi >= 1.0 && phi.is_finite()) {
                problems.push(format!("phi must be a finite value >= 1, got {phi}"));
            }
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0 && eps.is_finite()) {
                problems.push(format!("epsilon must be positive and finite, got {eps}"));
            }
        }
        if let StartPolicy::AdversarialWorstOfK { k: 0 } = self.start {
            problems.push("adversarial_worst_of_k needs k >= 1".into());
        }
        if self.max_iterations == Some(0) {
            problems.push("max_iterations must be at least 1".into());
        }
        if let SkeletonSource::Generate(g) = &self.skeleton {
            for (name, value) in [
                ("n", g.n),
                ("m", g.m),
                ("strategies_per_player", g.strategies_per_player),
                ("max_strategy_size", g.max_strategy_size),
            ] {
                if value == 0 {
                    problems.push(format!("generator {name} must be positive"));
                }
            }
            if g.d.is_some() && self.model != ModelKind::StepFunction {
                problems.push("generator d applies to step_function only".into());
            }
            if g.degree.is_some() && self.model != ModelKind::Polynomial {
                problems.push("generator degree applies to polynomial only".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Invalid(problems))
        }
    }

    /// Loads the skeleton named by the config. `base_dir` anchors relative
    /// instance paths.
    pub fn skeleton(&self, base_dir: &Path) -> Result<Game64, ExperimentError> {
        let game = match &self.skeleton {
            SkeletonSource::File(path) => load_instance(&base_dir.join(path))?,
            SkeletonSource::Generate(g) => {
                let mut rng = ChaCha8Rng::seed_from_u64(g.seed.unwrap_or(self.base_seed));
                let shape = match self.model {
                    ModelKind::Tabular => CostShape::Tabular,
                    ModelKind::StepFunction => CostShape::StepFunction {
                        total_breaks: g.d.unwrap_or(g.m),
                    },
                    ModelKind::Polynomial => CostShape::Polynomial {
                        degree: g.degree.unwrap_or(2),
                    },
                    ModelKind::CostSharing => CostShape::CostSharing,
                };
                match g.network_nodes {
                    Some(nodes) => random_network_game(nodes, g.m, g.n, shape, &mut rng)?,
                    None => {
                        let explicit = ExplicitShape {
                            players: g.n,
                            resources: g.m,
                            strategies_per_player: g.strategies_per_player,
                            max_strategy_size: g.max_strategy_size,
                        };
                        random_explicit_game(&explicit, shape, &mut rng)?
                    }
                }
            }
        };
        if game.kind() != self.model {
            return Err(ExperimentError::Invalid(vec![format!(
                "config model is {} but the skeleton is {}",
                self.model,
                game.kind()
            )]));
        }
        Ok(game)
    }
}

/// Seed of trial `trial` in cell `cell`: word `trial` of the ChaCha stream
/// `cell` keyed by `base`.
pub fn trial_seed(base: u64, cell: u64, trial: u64) -> u64 {
    let mut rng = parameter_rng(base, cell);
    rng.set_word_pos(2 * trial as u128);
    rng.next_u64()
}

// Streams of a trial seed used after the perturbation, which consumes the
// low stream indices.
const START_STREAM: u64 = u64::MAX;
const BRD_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub phi: f64,
    pub epsilon: f64,
    pub pivot: PivotRule,
}

/// Cells in φ-major, then ε, then pivot order.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &phi in &config.phis {
        for &epsilon in &config.epsilons {
            for &pivot in &config.pivots {
                out.push(Cell {
                    phi,
                    epsilon,
                    pivot,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub iterations: u64,
    pub status: Status,
    pub cap: f64,
    pub seconds: f64,
}

pub fn start_profile(
    game: &Game64,
    policy: StartPolicy,
    seed: u64,
) -> Result<StrategyProfile, brdlab_core::Error> {
    let mut rng = parameter_rng(seed, START_STREAM);
    Ok(match policy {
        StartPolicy::Lexicographic => lexicographic_profile(game),
        StartPolicy::RandomUniform => random_profile(game, &mut rng),
        StartPolicy::AdversarialWorstOfK { k } => worst_of_k_profile(game, k, &mut rng),
        StartPolicy::PotentialMinimizer => {
            brute_force_min_potential(game, &EnumerationBudget::default())?.0
        }
    })
}

pub fn run_trial(
    config: &ExperimentConfig,
    skeleton: &Game64,
    cell: &Cell,
    seed: u64,
) -> Result<TrialOutcome, brdlab_core::Error> {
    let clock = Instant::now();
    let game = perturb(
        skeleton,
        &PerturbationSpec::new(cell.phi, config.family, seed),
    )?;
    let start = start_profile(&game, config.start, seed)?;
    let mut brd = BrdConfig::new(cell.epsilon, cell.pivot)
        .with_seed(parameter_rng(seed, BRD_STREAM).next_u64());
    if let Some(cap) = config.max_iterations {
        brd = brd.with_max_iterations(cap);
    }
    let trace = run_brd(&game, &start, &brd)?;
    Ok(TrialOutcome {
        iterations: trace.iterations(),
        status: trace.status,
        cap: per_run_cap(&game, cell.epsilon),
        seconds: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    #[serde(serialize_with = "named::serialize")]
    pub model: ModelKind,
    pub n: usize,
    pub m: usize,
    pub phi: f64,
    pub epsilon: f64,
    #[serde(serialize_with = "named::serialize")]
    pub pivot: PivotRule,
    pub trials: u64,
    pub mean_t: f64,
    pub stddev_t: f64,
    pub max_t: u64,
    /// Every run converged within the worst-case cap of its instance.
    pub cap_ok: bool,
    pub cap_hits: u64,
    /// Bound on the expected number of moves; absent when the model's
    /// bound is undefined for the skeleton.
    pub smoothed_bound: Option<f64>,
    pub ratio: Option<f64>,
    pub iterations: Vec<u64>,
}

impl CellReport {
    pub fn failed(&self) -> bool {
        !self.cap_ok || self.ratio.is_some_and(|r| r.is_nan() || r > 1.0)
    }
}

/// Wall-clock statistics, kept apart from the deterministic reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellTiming {
    pub total_seconds: f64,
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
    #[serde(skip)]
    pub timing: Vec<CellTiming>,
}

pub const CSV_HEADER: &str =
    "model,n,m,phi,epsilon,pivot,trials,mean_t,stddev_t,max_t,cap_ok,cap_hits,smoothed_bound,ratio";

/// One CSV row; the per-trial counts live in the JSON sidecar only.
#[derive(Serialize)]
struct CsvRow<'a> {
    model: &'a str,
    n: usize,
    m: usize,
    phi: f64,
    epsilon: f64,
    pivot: &'a str,
    trials: u64,
    mean_t: f64,
    stddev_t: f64,
    max_t: u64,
    cap_ok: bool,
    cap_hits: u64,
    smoothed_bound: Option<f64>,
    ratio: Option<f64>,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            writer
                .serialize(CsvRow {
                    model: c.model.name(),
                    n: c.n,
                    m: c.m,
                    phi: c.phi,
                    epsilon: c.epsilon,
                    pivot: c.pivot.name(),
                    trials: c.trials,
                    mean_t: c.mean_t,
                    stddev_t: c.stddev_t,
                    max_t: c.max_t,
                    cap_ok: c.cap_ok,
                    cap_hits: c.cap_hits,
                    smoothed_bound: c.smoothed_bound,
                    ratio: c.ratio,
                })
                .expect("rows serialize");
        }
        let bytes = writer.into_inner().expect("in-memory writer");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    pub fn timing_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.timing).expect("timings serialize");
        text.push('\n');
        text
    }

    /// Writes `report.csv`, `report.json` and `timing.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io = |path: PathBuf| move |source| ExperimentError::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (name, body) in [
            ("report.csv", self.to_csv()),
            ("report.json", self.to_json()),
            ("timing.json", self.timing_json()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(path.clone()))?;
        }
        Ok(())
    }

    /// Human-readable description of every failed cell.
    pub fn failures(&self) -> Vec<String> {
        self.cells
            .iter()
            .filter(|c| c.failed())
            .map(|c| {
                let mut why = Vec::new();
                if c.cap_hits > 0 {
                    why.push(format!("{} runs hit the iteration cap", c.cap_hits));
                } else if !c.cap_ok {
                    why.push("a run exceeded the worst-case cap".to_string());
                }
                if let Some(r) = c.ratio.filter(|r| r.is_nan() || *r > 1.0) {
                    why.push(format!("mean T / bound = {r}"));
                }
                format!(
                    "phi={} epsilon={} pivot={}: {}",
                    c.phi,
                    c.epsilon,
                    c.pivot,
                    why.join("; ")
                )
            })
            .collect()
    }
}

/// Runs every (cell, trial) pair on the current rayon pool.
pub fn run_experiment(
    config: &ExperimentConfig,
    skeleton: &Game64,
) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let cells = cells(config);
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(c, t)| {
            run_trial(
                config,
                skeleton,
                &cells[c],
                trial_seed(config.base_seed, c as u64, t),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut reports = Vec::with_capacity(cells.len());
    let mut timing = Vec::with_capacity(cells.len());
    for (cell, runs) in cells.iter().zip(outcomes.chunks(config.trials as usize)) {
        let mut acc = Accumulator::default();
        for run in runs {
            acc.push(run.iterations as f64);
        }
        let bound = iteration_bound(&BoundQuery::for_game(skeleton, cell.epsilon, cell.phi))
            .ok()
            .map(|b| b.smoothed_expectation);
        let cap_hits = runs
            .iter()
            .filter(|r| r.status == Status::IterationCapHit)
            .count() as u64;
        reports.push(CellReport {
            model: skeleton.kind(),
            n: skeleton.players(),
            m: skeleton.resources(),
            phi: cell.phi,
            epsilon: cell.epsilon,
            pivot: cell.pivot,
            trials: config.trials,
            mean_t: acc.mean(),
            stddev_t: acc.std_dev(),
            max_t: runs.iter().map(|r| r.iterations).max().unwrap_or(0),
            cap_ok: cap_hits == 0 && runs.iter().all(|r| r.iterations as f64 <= r.cap),
            cap_hits,
            smoothed_bound: bound,
            ratio: bound.map(|b| acc.mean() / b),
            iterations: runs.iter().map(|r| r.iterations).collect(),
        });
        let total: f64 = runs.iter().map(|r| r.seconds).sum();
        timing.push(CellTiming {
            total_seconds: total,
            mean_seconds: total / runs.len() as f64,
            max_seconds: runs.iter().map(|r| r.seconds).fold(0.0, f64::max),
        });
    }
    Ok(ExperimentReport {
        config: config.clone(),
        cells: reports,
        timing,
    })
}

/// Pool size from the flag, else `BRDLAB_THREADS`, else rayon's default.
pub fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("BRDLAB_THREADS").ok()?.trim().parse().ok())
        .filter(|&t| t > 0)
}

/// Runs the experiment on a dedicated pool of `threads` workers.
pub fn run_with_threads(
    config: &ExperimentConfig,
    skeleton: &Game64,
    threads: Option<usize>,
) -> Result<ExperimentReport, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| ExperimentError::Invalid(vec![format!("thread pool: {e}")]))?;
    pool.install(|| run_experiment(config, skeleton))
}
