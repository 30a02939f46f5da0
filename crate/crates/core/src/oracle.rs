//! Brute-force ground truth for small games.
//!
//! Everything here is evaluated from the definitions: loads are recounted,
//! resource costs come straight from the cost parameters, and potentials are
//! summed term by term without the prefix tables the engine uses.

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, Strategy, StrategyProfile, StrategySpace};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_profiles: usize,
    pub max_paths_per_player: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_profiles: 1_000_000,
            max_paths_per_player: 10_000,
        }
    }
}

/// Every player's strategy set as an explicit list; network games enumerate
/// simple paths.
pub fn strategy_lists<S: Scalar>(
    game: &Game<S>,
    budget: &EnumerationBudget,
) -> Result<Vec<Vec<Strategy>>> {
    match game.strategy_space() {
        StrategySpace::Explicit(sets) => Ok(sets.clone()),
        StrategySpace::Network(net) => net
            .od_pairs
            .iter()
            .map(|&(o, d)| {
                Ok(net
                    .enumerate_simple_paths(o, d, budget.max_paths_per_player)?
                    .iter()
                    .map(|p| p.to_strategy())
                    .collect())
            })
            .collect(),
    }
}

/// Cartesian product of strategy lists, player 0 most significant.
#[derive(Debug, Clone)]
pub struct Profiles {
    lists: Vec<Vec<Strategy>>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Profiles {
    type Item = StrategyProfile;

    fn next(&mut self) -> Option<StrategyProfile> {
        if self.done {
            return None;
        }
        let profile = StrategyProfile(
            self.digits
                .iter()
                .zip(&self.lists)
                .map(|(&k, l)| l[k].clone())
                .collect(),
        );
        self.done = true;
        for p in (0..self.digits.len()).rev() {
            self.digits[p] += 1;
            if self.digits[p] < self.lists[p].len() {
                self.done = false;
                break;
            }
            self.digits[p] = 0;
        }
        Some(profile)
    }
}

/// All profiles in lexicographic order; fails if `Π |S_i|` exceeds the
/// budget.
pub fn enumerate_profiles<S: Scalar>(
    game: &Game<S>,
    budget: &EnumerationBudget,
) -> Result<Profiles> {
    let lists = strategy_lists(game, budget)?;
    let count: f64 = lists.iter().map(|l| l.len() as f64).product();
    if count > budget.max_profiles as f64 {
        return Err(Error::BudgetExceeded {
            count,
            budget: budget.max_profiles,
        });
    }
    let done = lists.iter().any(Vec::is_empty);
    Ok(Profiles {
        digits: vec![0; lists.len()],
        lists,
        done,
    })
}

fn direct_loads(m: usize, profile: &StrategyProfile) -> Vec<usize> {
    (0..m)
        .map(|r| profile.choices().iter().filter(|s| s.contains(r)).count())
        .collect()
}

fn direct_cost<S: Scalar>(game: &Game<S>, profile: &StrategyProfile, i: PlayerId) -> S {
    let loads = direct_loads(game.resources(), profile);
    let n = game.players();
    profile
        .player(i)
        .resources()
        .iter()
        .fold(S::zero(), |acc, &r| {
            acc + game
                .costs()
                .resource_cost(r, loads[r], n)
                .expect("load within 1..=n")
        })
}

/// `Φ(s)` summed term by term from the cost parameters.
pub fn direct_potential<S: Scalar>(game: &Game<S>, profile: &StrategyProfile) -> S {
    let loads = direct_loads(game.resources(), profile);
    let n = game.players();
    let mut phi = S::zero();
    for (r, &l) in loads.iter().enumerate() {
        for j in 1..=l {
            phi += game
                .costs()
                .resource_cost(r, j, n)
                .expect("load within 1..=n");
        }
    }
    phi
}

/// `C_i(s)` from the definition.
pub fn direct_player_cost<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    i: PlayerId,
) -> Result<S> {
    game.validate_profile(profile)?;
    game.check_player(i)?;
    Ok(direct_cost(game, profile, i))
}

/// Global minimizer of the potential; the first in lexicographic order wins
/// ties.
pub fn brute_force_min_potential<S: Scalar>(
    game: &Game<S>,
    budget: &EnumerationBudget,
) -> Result<(StrategyProfile, S)> {
    let mut best: Option<(StrategyProfile, S)> = None;
    for s in enumerate_profiles(game, budget)? {
        let phi = direct_potential(game, &s);
        if best.as_ref().is_none_or(|(_, b)| phi < *b) {
            best = Some((s, phi));
        }
    }
    best.ok_or_else(|| Error::Degenerate("game has no strategy profiles".into()))
}

/// Literal check of `C_i(s) ≤ α · C_i(s_i', s_{-i})` for every player and
/// every alternative strategy.
pub fn brute_force_is_alpha_pne<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    alpha: S,
    budget: &EnumerationBudget,
) -> Result<bool> {
    if alpha < S::one() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be at least 1, got {alpha}"
        )));
    }
    game.validate_profile(profile)?;
    let lists = strategy_lists(game, budget)?;
    for (i, list) in lists.iter().enumerate() {
        let current = direct_cost(game, profile, i);
        for alt in list {
            let deviated = profile.with_deviation(i, alt.clone());
            if current > alpha * direct_cost(game, &deviated, i) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest ratio `C_i(s) / C_i(s_i', s_{-i})` over all unilateral deviations.
pub fn worst_deviation_ratio<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    budget: &EnumerationBudget,
) -> Result<f64> {
    game.validate_profile(profile)?;
    let lists = strategy_lists(game, budget)?;
    let mut worst: f64 = 1.0;
    for (i, list) in lists.iter().enumerate() {
        let current = direct_cost(game, profile, i).to_f64();
        for alt in list {
            let c = direct_cost(game, &profile.with_deviation(i, alt.clone()), i).to_f64();
            worst = worst.max(current / c);
        }
    }
    Ok(worst)
}
