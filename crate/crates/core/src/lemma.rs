//! Closed-form iteration bounds and Monte-Carlo estimation of the truncated
//! reciprocal-minimum expectation
//!
//! ```text
//! E[min{max_i α / X_i, μ^β}] ≤ φ α (β + 1) μ ln μ + 1
//! ```
//!
//! for `μ` independent φ-smooth `X_i`.
//!
//! The cost-sharing bound is computed from the lemma parameters
//! `μ = m, α = (1 + 1/ε) n m H_n, β = m ln(n+1)/ln m`. An alternative form
//! of that bound carries an extra `ln(m / a_min)` factor; it is not used here
//! because it does not follow from the potential and cost bounds.

use rayon::prelude::*;

use crate::cost::{harmonic, CostModel, ModelKind};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::scalar::Scalar;
use crate::smoothing::{parameter_rng, PhiSmoothFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaParams {
    pub mu: usize,
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
}

impl LemmaParams {
    /// `mu = 1` is accepted for Monte-Carlo sanity checks even though the
    /// bound is only informative from `mu = 2`.
    pub fn new(mu: usize, alpha: f64, beta: f64, phi: f64) -> Result<Self> {
        if mu == 0 {
            return Err(Error::InvalidParameter("mu must be positive".into()));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 1, got {alpha}"
            )));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be >= 0, got {beta}"
            )));
        }
        if !(phi >= 1.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "phi must be >= 1, got {phi}"
            )));
        }
        Ok(Self {
            mu,
            alpha,
            beta,
            phi,
        })
    }

    /// The truncation level `μ^β`.
    pub fn truncation(&self) -> f64 {
        (self.mu as f64).powf(self.beta)
    }
}

/// `φ α (β + 1) μ ln μ + 1`.
pub fn lemma_bound_rhs(p: &LemmaParams) -> f64 {
    let mu = p.mu as f64;
    p.phi * p.alpha * (p.beta + 1.0) * mu * mu.ln() + 1.0
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample (n − 1) variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl From<Accumulator> for Estimate {
    fn from(acc: Accumulator) -> Self {
        Estimate {
            mean: acc.mean(),
            stderr: acc.std_err(),
            trials: acc.count(),
        }
    }
}

pub const MIN_MC_TRIALS: u64 = 1_000;
const CHUNK: u64 = 4_096;

/// `min{max_i α/X_i, μ^β} = min{α / min_i X_i, μ^β}` for one trial, with
/// `X_i = family.from_unit(u_i)`.
fn trial_value(p: &LemmaParams, families: &[PhiSmoothFamily], seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = parameter_rng(seed, trial);
    let mut mins = vec![f64::INFINITY; families.len()];
    for _ in 0..p.mu {
        let u: f64 = rand::Rng::random(&mut rng);
        for (m, f) in mins.iter_mut().zip(families) {
            *m = m.min(f.from_unit(u));
        }
    }
    let cap = p.truncation();
    mins.into_iter().map(|x| (p.alpha / x).min(cap)).collect()
}

/// Estimates, for each family, the truncated expectation on the same unit
/// draws. Results are independent of the rayon pool size.
pub fn lemma_mc_paired(
    p: &LemmaParams,
    families: &[PhiSmoothFamily],
    trials: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if trials < MIN_MC_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_MC_TRIALS} trials required, got {trials}"
        )));
    }
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut accs = vec![Accumulator::default(); families.len()];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                for (acc, v) in accs.iter_mut().zip(trial_value(p, families, seed, t)) {
                    acc.push(v);
                }
            }
            accs
        })
        .collect();
    let mut total = vec![Accumulator::default(); families.len()];
    for part in &partials {
        for (t, a) in total.iter_mut().zip(part) {
            t.merge(a);
        }
    }
    Ok(total.into_iter().map(Estimate::from).collect())
}

/// Mean and standard error of `min{max_i α/X_i, μ^β}` with `X_i` drawn
/// i.i.d. from `family`.
pub fn lemma_mc_estimate(
    p: &LemmaParams,
    family: &PhiSmoothFamily,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    Ok(lemma_mc_paired(p, std::slice::from_ref(family), trials, seed)?[0])
}

/// Model-specific inputs to the iteration bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundModel {
    General,
    StepFunction { total_breaks: usize },
    Polynomial { degree: usize, support_size: usize },
    CostSharing,
}

impl BoundModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            BoundModel::General => ModelKind::Tabular,
            BoundModel::StepFunction { .. } => ModelKind::StepFunction,
            BoundModel::Polynomial { .. } => ModelKind::Polynomial,
            BoundModel::CostSharing => ModelKind::CostSharing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub model: BoundModel,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub phi: f64,
}

impl BoundQuery {
    /// Query matching the structure of `game`.
    pub fn for_game<S: Scalar>(game: &Game<S>, epsilon: f64, phi: f64) -> Self {
        let model = match game.costs() {
            CostModel::Tabular(_) => BoundModel::General,
            CostModel::StepFunction(s) => BoundModel::StepFunction {
                total_breaks: s.total_breaks(),
            },
            CostModel::Polynomial(p) => BoundModel::Polynomial {
                degree: p.degree,
                support_size: p.support_size(),
            },
            CostModel::CostSharing(_) => BoundModel::CostSharing,
        };
        BoundQuery {
            model,
            n: game.players(),
            m: game.resources(),
            epsilon,
            phi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationBound {
    /// `(n + 1)^m`, the number of distinct load profiles.
    pub exhaustive_cap: f64,
    /// Bound on the expected number of iterations under φ-smooth costs.
    pub smoothed_expectation: f64,
    /// Lemma parameters the expectation bound was evaluated at.
    pub lemma: LemmaParams,
}

fn log_ratio_beta(m: usize, n: usize, mu: usize, what: &str) -> Result<f64> {
    if mu < 2 {
        return Err(Error::InvalidParameter(format!(
            "{what} = {mu}: the exponent m ln(n+1) / ln {what} needs {what} >= 2"
        )));
    }
    Ok(m as f64 * ((n + 1) as f64).ln() / (mu as f64).ln())
}

/// Exhaustive and smoothed iteration bounds for `(1 + ε)`-dynamics.
///
/// | model | μ | α | β |
/// |---|---|---|---|
/// | general | `mn` | `(1+1/ε) nm` | `m` |
/// | step | `d` | `(1+1/ε) nd` | `m ln(n+1)/ln d` |
/// | polynomial | `d̃` | `(1+1/ε) d̃ n^{d+1}` | `m ln(n+1)/ln d̃` |
/// | cost sharing | `m` | `(1+1/ε) nm H_n` | `m ln(n+1)/ln m` |
pub fn iteration_bound(q: &BoundQuery) -> Result<IterationBound> {
    if q.n == 0 || q.m == 0 {
        return Err(Error::InvalidParameter("n and m must be positive".into()));
    }
    if !(q.epsilon > 0.0 && q.epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {}",
            q.epsilon
        )));
    }
    let (n, m) = (q.n, q.m);
    let nf = n as f64;
    let mf = m as f64;
    let scale = 1.0 + 1.0 / q.epsilon;
    let (mu, alpha, beta) = match q.model {
        BoundModel::General => (m * n, scale * nf * mf, mf),
        BoundModel::StepFunction { total_breaks: d } => {
            (d, scale * nf * d as f64, log_ratio_beta(m, n, d, "d")?)
        }
        BoundModel::Polynomial {
            degree,
            support_size,
        } => (
            support_size,
            scale * support_size as f64 * nf.powi(degree as i32 + 1),
            log_ratio_beta(m, n, support_size, "d̃")?,
        ),
        BoundModel::CostSharing => (
            m,
            scale * nf * mf * harmonic::<f64>(n),
            log_ratio_beta(m, n, m, "m")?,
        ),
    };
    let lemma = LemmaParams::new(mu, alpha, beta, q.phi)?;
    Ok(IterationBound {
        exhaustive_cap: (nf + 1.0).powf(mf),
        smoothed_expectation: lemma_bound_rhs(&lemma),
        lemma,
    })
}

/// Worst-case cap on the number of moves of one run on a realized instance:
/// `min{(1 + 1/ε) Φ_max / C_min, (n + 1)^m}`, with the per-model potential
/// and cost bounds. For tabular costs this is
/// `min{(1 + 1/ε) nm c_max/c_min, (n+1)^m}`.
pub fn per_run_cap<S: Scalar>(game: &Game<S>, epsilon: f64) -> f64 {
    let exhaustive = (game.players() as f64 + 1.0).powf(game.resources() as f64);
    let ratio = match game.min_cost_lower_bound() {
        Ok(c_min) => (1.0 + 1.0 / epsilon) * game.potential_upper_bound().to_f64() / c_min.to_f64(),
        Err(_) => f64::INFINITY,
    };
    ratio.min(exhaustive)
}

/// The looser general-model cap `min{(1 + 1/ε) nm / c_min, (nm)^m}`, valid
/// when all costs are at most 1 and `m ≥ 2`.
pub fn general_cap_loose(n: usize, m: usize, epsilon: f64, c_min: f64) -> f64 {
    let nm = (n * m) as f64;
    ((1.0 + 1.0 / epsilon) * nm / c_min).min(nm.powf(m as f64))
}
