//! Approximate better-response dynamics.
//!
//! Starting from any profile, repeatedly let some player switch to a
//! strategy that lowers their cost by more than a factor `α = 1 + ε` until no
//! such move exists. The equilibrium test and the move search are one pass:
//! a search that comes back empty certifies an α-PNE.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, Strategy, StrategyProfile, StrategySpace};
use crate::lemma::per_run_cap;
use crate::network::shortest_path;
use crate::scalar::Scalar;

/// Hard ceiling on the default iteration cap.
pub const MAX_DEFAULT_ITERATIONS: u64 = 100_000_000;

/// Which improving move to apply when several exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PivotRule {
    /// First `(player, strategy)` pair in scan order that passes the test.
    /// Network games have no enumerable strategy list, so there the scan
    /// visits each player's best response instead.
    FirstImprovement,
    /// First player, in index order, whose best response passes.
    BestResponsePivot,
    /// Best response with the largest absolute cost reduction; ties go to the
    /// lowest player index.
    MaxGain,
    /// Uniformly random player among those whose best response passes.
    RandomImproving,
}

impl PivotRule {
    pub const ALL: [PivotRule; 4] = [
        PivotRule::FirstImprovement,
        PivotRule::BestResponsePivot,
        PivotRule::MaxGain,
        PivotRule::RandomImproving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PivotRule::FirstImprovement => "first_improvement",
            PivotRule::BestResponsePivot => "best_response",
            PivotRule::MaxGain => "max_gain",
            PivotRule::RandomImproving => "random_improving",
        }
    }
}

impl std::fmt::Display for PivotRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PivotRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PivotRule::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown pivot rule `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrdConfig {
    /// `α = 1 + epsilon`; must be positive.
    pub epsilon: f64,
    pub pivot_rule: PivotRule,
    /// `None` picks `min(⌈iteration cap of the instance⌉, 10^8)`.
    pub max_iterations: Option<u64>,
    pub seed: u64,
}

impl BrdConfig {
    pub fn new(epsilon: f64, pivot_rule: PivotRule) -> Self {
        Self {
            epsilon,
            pivot_rule,
            max_iterations: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, cap: u64) -> Self {
        self.max_iterations = Some(cap);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One applied α-improving move.
#[derive(Debug, Clone, PartialEq)]
pub struct Move<S> {
    pub player: PlayerId,
    pub from: Strategy,
    pub to: Strategy,
    pub cost_before: S,
    pub cost_after: S,
    pub potential_after: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationCapHit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<S> {
    pub start: StrategyProfile,
    pub start_potential: S,
    pub moves: Vec<Move<S>>,
    pub final_profile: StrategyProfile,
    pub status: Status,
}

impl<S: Scalar> RunTrace<S> {
    /// Number of moves `T`.
    pub fn iterations(&self) -> u64 {
        self.moves.len() as u64
    }

    /// `Φ(s^0), Φ(s^1), …, Φ(s^T)`.
    pub fn potentials(&self) -> Vec<S> {
        std::iter::once(self.start_potential)
            .chain(self.moves.iter().map(|m| m.potential_after))
            .collect()
    }
}

/// A candidate deviation found by a scan.
#[derive(Debug, Clone)]
struct Candidate<S> {
    player: PlayerId,
    to: Strategy,
    cost_before: S,
    cost_after: S,
}

/// Mutable dynamics state: the current profile with its loads and potential.
struct Dynamics<'g, S> {
    game: &'g Game<S>,
    profile: StrategyProfile,
    loads: Vec<usize>,
    potential: S,
}

impl<'g, S: Scalar> Dynamics<'g, S> {
    fn new(game: &'g Game<S>, profile: StrategyProfile) -> Self {
        let loads = game.loads_unchecked(&profile);
        let potential = game.potential_of_loads(&loads);
        Dynamics {
            game,
            profile,
            loads: loads.0,
            potential,
        }
    }

    fn current_cost(&self, i: PlayerId) -> S {
        self.game.cost_at(&self.loads, self.profile.player(i))
    }

    /// Best response of player `i` and its cost. Explicit sets are scanned in
    /// stored order and the first minimum wins.
    fn best_response(&self, i: PlayerId) -> (Strategy, S) {
        let current = self.profile.player(i);
        match self.game.strategy_space() {
            StrategySpace::Explicit(sets) => {
                let mut best: Option<(&Strategy, S)> = None;
                for s in &sets[i] {
                    let c = self.game.deviation_cost(&self.loads, current, s);
                    if best.as_ref().is_none_or(|(_, b)| c < *b) {
                        best = Some((s, c));
                    }
                }
                let (s, c) = best.expect("validated games have nonempty strategy sets");
                (s.clone(), c)
            }
            StrategySpace::Network(net) => {
                let (o, d) = net.od_pairs[i];
                let (path, c) = shortest_path(self.game, net, &self.loads, current, o, d)
                    .expect("validated networks connect every od pair");
                (path.to_strategy(), c)
            }
        }
    }

    fn improving_best_response(&self, i: PlayerId, alpha: S) -> Option<Candidate<S>> {
        let cost_before = self.current_cost(i);
        let (to, cost_after) = self.best_response(i);
        (alpha * cost_after < cost_before).then_some(Candidate {
            player: i,
            to,
            cost_before,
            cost_after,
        })
    }

    fn find<R: Rng>(&self, alpha: S, rule: PivotRule, rng: &mut R) -> Option<Candidate<S>> {
        let n = self.game.players();
        match rule {
            PivotRule::FirstImprovement => match self.game.strategy_space() {
                StrategySpace::Explicit(sets) => {
                    for (i, set) in sets.iter().enumerate() {
                        let current = self.profile.player(i);
                        let cost_before = self.current_cost(i);
                        for s in set {
                            let cost_after = self.game.deviation_cost(&self.loads, current, s);
                            if alpha * cost_after < cost_before {
                                return Some(Candidate {
                                    player: i,
                                    to: s.clone(),
                                    cost_before,
                                    cost_after,
                                });
                            }
                        }
                    }
                    None
                }
                StrategySpace::Network(_) => {
                    (0..n).find_map(|i| self.improving_best_response(i, alpha))
                }
            },
            PivotRule::BestResponsePivot => {
                (0..n).find_map(|i| self.improving_best_response(i, alpha))
            }
            PivotRule::MaxGain => {
                let mut best: Option<Candidate<S>> = None;
                for c in (0..n).filter_map(|i| self.improving_best_response(i, alpha)) {
                    let gain = c.cost_before - c.cost_after;
                    if best
                        .as_ref()
                        .is_none_or(|b| gain > b.cost_before - b.cost_after)
                    {
                        best = Some(c);
                    }
                }
                best
            }
            PivotRule::RandomImproving => {
                let mut all: Vec<_> = (0..n)
                    .filter_map(|i| self.improving_best_response(i, alpha))
                    .collect();
                if all.is_empty() {
                    None
                } else {
                    let k = rng.random_range(0..all.len());
                    Some(all.swap_remove(k))
                }
            }
        }
    }

    /// Moves player `c.player` and updates loads and potential on the
    /// touched resources only.
    fn apply(&mut self, c: Candidate<S>) -> Move<S> {
        let from = std::mem::replace(&mut self.profile.0[c.player], c.to.clone());
        for &r in from.resources() {
            if !c.to.contains(r) {
                self.potential -= self.game.cost(r, self.loads[r]);
                self.loads[r] -= 1;
            }
        }
        for &r in c.to.resources() {
            if !from.contains(r) {
                self.loads[r] += 1;
                self.potential += self.game.cost(r, self.loads[r]);
            }
        }
        Move {
            player: c.player,
            from,
            to: c.to,
            cost_before: c.cost_before,
            cost_after: c.cost_after,
            potential_after: self.potential,
        }
    }
}

fn check_alpha<S: Scalar>(alpha: S) -> Result<()> {
    if alpha >= S::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must be at least 1, got {alpha}"
        )))
    }
}

/// Whether no player can lower their cost by more than a factor `alpha`.
///
/// Evaluated through best responses: the condition fails for some deviation
/// iff it fails for a best response.
pub fn is_alpha_pne<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    alpha: S,
) -> Result<bool> {
    check_alpha(alpha)?;
    game.validate_profile(profile)?;
    let dynamics = Dynamics::new(game, profile.clone());
    Ok((0..game.players()).all(|i| dynamics.improving_best_response(i, alpha).is_none()))
}

/// `α · C_i(s', s_{-i}) < C_i(s)`, strictly.
pub fn is_alpha_improving<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    i: PlayerId,
    deviation: &Strategy,
    alpha: S,
) -> Result<bool> {
    check_alpha(alpha)?;
    game.validate_profile(profile)?;
    game.validate_strategy(i, deviation)?;
    let loads = game.loads_unchecked(profile);
    let before = game.cost_at(&loads.0, profile.player(i));
    let after = game.deviation_cost(&loads.0, profile.player(i), deviation);
    Ok(alpha * after < before)
}

/// A minimizer of `C_i(·, s_{-i})` and its cost.
pub fn best_response<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    i: PlayerId,
) -> Result<(Strategy, S)> {
    game.check_player(i)?;
    game.validate_profile(profile)?;
    Ok(Dynamics::new(game, profile.clone()).best_response(i))
}

/// An α-improving move chosen by `rule`, or `None` iff `profile` is an α-PNE.
pub fn find_improving_move<S: Scalar, R: Rng>(
    game: &Game<S>,
    profile: &StrategyProfile,
    alpha: S,
    rule: PivotRule,
    rng: &mut R,
) -> Result<Option<Move<S>>> {
    check_alpha(alpha)?;
    game.validate_profile(profile)?;
    let mut dynamics = Dynamics::new(game, profile.clone());
    Ok(dynamics.find(alpha, rule, rng).map(|c| dynamics.apply(c)))
}

/// Runs `(1 + ε)`-better-response dynamics from `start`.
pub fn run_brd<S: Scalar>(
    game: &Game<S>,
    start: &StrategyProfile,
    config: &BrdConfig,
) -> Result<RunTrace<S>> {
    config.validate()?;
    game.validate_profile(start)?;
    let alpha = S::one() + S::from_f64(config.epsilon);
    let cap = config
        .max_iterations
        .unwrap_or_else(|| default_max_iterations(game, config.epsilon));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dynamics = Dynamics::new(game, start.clone());
    let start_potential = dynamics.potential;
    let mut moves = Vec::new();
    let status = loop {
        match dynamics.find(alpha, config.pivot_rule, &mut rng) {
            None => break Status::Converged,
            Some(_) if moves.len() as u64 >= cap => break Status::IterationCapHit,
            Some(c) => moves.push(dynamics.apply(c)),
        }
    };
    Ok(RunTrace {
        start: start.clone(),
        start_potential,
        moves,
        final_profile: dynamics.profile,
        status,
    })
}

/// `min(⌈per-run iteration cap⌉, 10^8)`, at least 1.
pub fn default_max_iterations<S: Scalar>(game: &Game<S>, epsilon: f64) -> u64 {
    let cap = per_run_cap(game, epsilon).ceil();
    if cap.is_finite() && cap < MAX_DEFAULT_ITERATIONS as f64 {
        (cap as u64).max(1)
    } else {
        MAX_DEFAULT_ITERATIONS
    }
}
