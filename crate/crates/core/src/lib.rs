//! Smoothed approximate better-response dynamics for congestion games.
//!
//! The engine is generic over the [`Scalar`] the costs are expressed in; the
//! aliases below fix the common choices. Sampling, logarithmic bounds and
//! Monte-Carlo estimation work in `f64`.

pub mod brd;
pub mod cost;
pub mod error;
pub mod game;
pub mod generate;
pub mod lemma;
pub mod network;
pub mod oracle;
pub mod scalar;
pub mod smoothing;

pub use brd::{
    best_response, find_improving_move, is_alpha_improving, is_alpha_pne, run_brd, BrdConfig, Move,
    PivotRule, RunTrace, Status,
};
pub use cost::{
    harmonic, CostModel, CostSharingCosts, ModelKind, PolynomialCosts, StepFunctionCosts,
    TabularCosts,
};
pub use error::{Error, Result, Subject, Violation};
pub use game::{
    validate_game, Game, LoadProfile, PlayerId, ResourceId, Strategy, StrategyProfile,
    StrategySpace,
};
pub use lemma::{
    iteration_bound, lemma_bound_rhs, lemma_mc_estimate, lemma_mc_paired, per_run_cap, BoundModel,
    BoundQuery, Estimate, IterationBound, LemmaParams,
};
pub use network::{network_best_response, Edge, NetworkSpec, PathStrategy};
pub use oracle::{
    brute_force_is_alpha_pne, brute_force_min_potential, enumerate_profiles, EnumerationBudget,
};
pub use scalar::Scalar;
pub use smoothing::{
    perturb, sample_phi_smooth, FamilyKind, PerturbationFamily, PerturbationSpec, PhiSmoothFamily,
};

pub use num_rational::Rational64;

pub type Game64 = Game<f64>;
pub type Game32 = Game<f32>;
pub type GameExact = Game<Rational64>;

pub type CostModel64 = CostModel<f64>;
pub type CostModelExact = CostModel<Rational64>;

pub type RunTrace64 = RunTrace<f64>;
pub type Move64 = Move<f64>;
