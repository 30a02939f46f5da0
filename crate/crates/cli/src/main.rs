use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brdlab::experiment::{start_profile, ExperimentError};
use brdlab::instance::{load_instance, parse_json, save_instance, InstanceError};
use brdlab::{run_with_threads, ExperimentConfig, StartPolicy};
use brdlab_core::oracle::worst_deviation_ratio;
use brdlab_core::{
    brute_force_is_alpha_pne, brute_force_min_potential, lemma_bound_rhs, lemma_mc_estimate,
    per_run_cap, perturb, run_brd, BrdConfig, EnumerationBudget, Game64, LemmaParams,
    PerturbationFamily, PerturbationSpec, PhiSmoothFamily, PivotRule, Status, Strategy,
    StrategyProfile,
};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "brdlab",
    version,
    about = "Smoothed better-response dynamics in congestion games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment and write report.csv, report.json and timing.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the base seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; falls back to BRDLAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a φ-smooth perturbation of an instance.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "uniform_low")]
        family: PerturbationFamily,
    },
    /// Run the dynamics once and print the trace summary.
    Brd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "first_improvement")]
        pivot: PivotRule,
        /// lexicographic, random, worst_of_k:K or potential_minimizer.
        #[arg(long, default_value = "lexicographic")]
        start: StartPolicy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iterations: Option<u64>,
    },
    /// Brute-force equilibrium checks.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Profile to check, as JSON: one resource list per player, e.g. '[[0],[1]]'.
        #[arg(
            long,
            required_unless_present = "min_potential",
            conflicts_with = "min_potential"
        )]
        check: Option<String>,
        /// Report the global potential minimizer.
        #[arg(long)]
        min_potential: bool,
    },
    /// Monte-Carlo estimate of E[min{max_i α/X_i, μ^β}] next to its bound.
    Lemma {
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "uniform_low")]
        family: PerturbationFamily,
        /// Window center for the uniform_window family.
        #[arg(long, default_value_t = 0.5)]
        center: f64,
    },
}

enum Failure {
    Validation(String),
    Bound(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Bound(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Bound(m) | Failure::Other(m) => m,
        }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::Io { .. } => Failure::Other(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io { .. } => Failure::Other(e.to_string()),
            ExperimentError::Skeleton(inner) => inner.into(),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<brdlab_core::Error> for Failure {
    fn from(e: brdlab_core::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn print(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("json values serialize")
    );
}

fn resources(profile: &StrategyProfile) -> Vec<Vec<usize>> {
    profile
        .choices()
        .iter()
        .map(|s| s.resources().to_vec())
        .collect()
}

fn run(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::Other(format!("{}: {e}", config_path.display())))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = seed {
        config.base_seed = seed;
    }
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let skeleton = config.skeleton(base_dir)?;
    let report = run_with_threads(
        &config,
        &skeleton,
        brdlab::experiment::thread_count(threads),
    )?;
    report.write(out)?;
    let failures = report.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Bound(format!(
            "{} failed cells:\n  {}",
            failures.len(),
            failures.join("\n  ")
        )))
    }
}

fn brd(
    input: &Path,
    epsilon: f64,
    pivot: PivotRule,
    start: StartPolicy,
    seed: u64,
    max_iterations: Option<u64>,
) -> Result<(), Failure> {
    let game = load_instance(input)?;
    let profile = start_profile(&game, start, seed)?;
    let mut config = BrdConfig::new(epsilon, pivot).with_seed(seed);
    if let Some(cap) = max_iterations {
        config = config.with_max_iterations(cap);
    }
    let trace = run_brd(&game, &profile, &config)?;
    let cap = per_run_cap(&game, epsilon);
    let converged = trace.status == Status::Converged;
    print(json!({
        "status": if converged { "converged" } else { "iteration_cap_hit" },
        "iterations": trace.iterations(),
        "per_run_cap": cap,
        "start_potential": trace.start_potential,
        "final_potential": game.potential(&trace.final_profile)?,
        "final_profile": resources(&trace.final_profile),
    }));
    if !converged {
        return Err(Failure::Bound(format!(
            "stopped after {} moves without converging",
            trace.iterations()
        )));
    }
    if trace.iterations() as f64 > cap {
        return Err(Failure::Bound(format!(
            "{} moves exceed the worst-case cap {cap}",
            trace.iterations()
        )));
    }
    Ok(())
}

fn parse_profile(game: &Game64, text: &str) -> Result<StrategyProfile, Failure> {
    let lists: Vec<Vec<usize>> =
        parse_json(text).map_err(|e| Failure::Validation(format!("profile: {e}")))?;
    let profile = StrategyProfile(lists.into_iter().map(Strategy::new).collect());
    game.validate_profile(&profile)?;
    Ok(profile)
}

fn oracle(input: &Path, alpha: f64, check: Option<&str>) -> Result<(), Failure> {
    let game = load_instance(input)?;
    let budget = EnumerationBudget::default();
    let (profile, label) = match check {
        Some(text) => (parse_profile(&game, text)?, "profile"),
        None => (
            brute_force_min_potential(&game, &budget)?.0,
            "min_potential_profile",
        ),
    };
    print(json!({
        label: resources(&profile),
        "potential": game.potential(&profile)?,
        "alpha": alpha,
        "is_alpha_pne": brute_force_is_alpha_pne(&game, &profile, alpha, &budget)?,
        "worst_deviation_ratio": worst_deviation_ratio(&game, &profile, &budget)?,
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn lemma(
    mu: usize,
    alpha: f64,
    beta: f64,
    phi: f64,
    trials: u64,
    seed: u64,
    family: PerturbationFamily,
    center: f64,
) -> Result<(), Failure> {
    let params = LemmaParams::new(mu, alpha, beta, phi)?;
    let dist = match family {
        PerturbationFamily::UniformLow => PhiSmoothFamily::uniform_low(phi)?,
        PerturbationFamily::UniformWindow => PhiSmoothFamily::window(center, phi)?,
    };
    let est = lemma_mc_estimate(&params, &dist, trials, seed)?;
    let bound = lemma_bound_rhs(&params);
    print(json!({
        "mu": mu,
        "alpha": alpha,
        "beta": beta,
        "phi": phi,
        "family": family.name(),
        "trials": est.trials,
        "mean": est.mean,
        "stderr": est.stderr,
        "bound": bound,
    }));
    if est.mean - 3.0 * est.stderr > bound {
        return Err(Failure::Bound(format!(
            "estimate {} ± {} exceeds the bound {bound}",
            est.mean, est.stderr
        )));
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => run(&config, &out, seed, threads),
        Command::Perturb {
            input,
            phi,
            seed,
            out,
            family,
        } => {
            let game = load_instance(&input)?;
            let perturbed = perturb(&game, &PerturbationSpec::new(phi, family, seed))?;
            save_instance(&perturbed, &out)?;
            Ok(())
        }
        Command::Brd {
            input,
            epsilon,
            pivot,
            start,
            seed,
            max_iterations,
        } => brd(&input, epsilon, pivot, start, seed, max_iterations),
        Command::Oracle {
            input,
            alpha,
            check,
            min_potential: _,
        } => oracle(&input, alpha, check.as_deref()),
        Command::Lemma {
            mu,
            alpha,
            beta,
            phi,
            trials,
            seed,
            family,
            center,
        } => lemma(mu, alpha, beta, phi, trials, seed, family, center),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
