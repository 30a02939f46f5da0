//! Random adversarial skeletons and start profiles for experiments and tests.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::cost::{
    CostModel, CostSharingCosts, ModelKind, PolynomialCosts, StepFunctionCosts, TabularCosts,
};
use crate::error::{Error, Result};
use crate::game::{Game, Strategy, StrategyProfile, StrategySpace};
use crate::network::{Edge, NetworkSpec};
use crate::scalar::Scalar;

/// Structure of the cost parameters to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostShape {
    Tabular,
    /// `total_breaks` break points spread over the resources, at least one
    /// (at load 1) per resource.
    StepFunction {
        total_breaks: usize,
    },
    /// Random nonempty supports within `0..=degree`.
    Polynomial {
        degree: usize,
    },
    CostSharing,
}

impl CostShape {
    pub fn kind(&self) -> ModelKind {
        match self {
            CostShape::Tabular => ModelKind::Tabular,
            CostShape::StepFunction { .. } => ModelKind::StepFunction,
            CostShape::Polynomial { .. } => ModelKind::Polynomial,
            CostShape::CostSharing => ModelKind::CostSharing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplicitShape {
    pub players: usize,
    pub resources: usize,
    pub strategies_per_player: usize,
    pub max_strategy_size: usize,
}

/// Uniform on `(0, 1]`.
fn nominal<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    S::from_f64(1.0 - rng.random::<f64>())
}

/// Random nominal parameters for `n` players and `m` resources.
pub fn random_costs<S: Scalar, R: Rng + ?Sized>(
    shape: CostShape,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<CostModel<S>> {
    Ok(match shape {
        CostShape::Tabular => CostModel::Tabular(TabularCosts {
            table: (0..m)
                .map(|_| (0..n).map(|_| nominal(rng)).collect())
                .collect(),
        }),
        CostShape::StepFunction { total_breaks } => {
            if total_breaks < m || total_breaks > m * n {
                return Err(Error::InvalidParameter(format!(
                    "{total_breaks} break points cannot be spread over {m} resources with n = {n}"
                )));
            }
            let mut breaks = vec![vec![1usize]; m];
            for _ in m..total_breaks {
                let open: Vec<usize> = (0..m).filter(|&r| breaks[r].len() < n).collect();
                let r = *open.choose(rng).expect("capacity checked above");
                let free: Vec<usize> = (2..=n).filter(|b| !breaks[r].contains(b)).collect();
                breaks[r].push(*free.choose(rng).expect("resource has room"));
            }
            breaks.iter_mut().for_each(|b| b.sort_unstable());
            let jumps = breaks
                .iter()
                .map(|b| b.iter().map(|_| nominal(rng)).collect())
                .collect();
            CostModel::StepFunction(StepFunctionCosts { breaks, jumps })
        }
        CostShape::Polynomial { degree } => {
            let coefficients = (0..m)
                .map(|_| {
                    let mut row: Vec<S> = (0..=degree)
                        .map(|_| {
                            if rng.random_bool(0.5) {
                                nominal(rng)
                            } else {
                                S::zero()
                            }
                        })
                        .collect();
                    if row.iter().all(|a| *a == S::zero()) {
                        let j = rng.random_range(0..=degree);
                        row[j] = nominal(rng);
                    }
                    row
                })
                .collect();
            CostModel::Polynomial(PolynomialCosts {
                degree,
                coefficients,
            })
        }
        CostShape::CostSharing => CostModel::CostSharing(CostSharingCosts {
            fixed: (0..m).map(|_| nominal(rng)).collect(),
        }),
    })
}

/// Per-player lists of distinct random nonempty resource sets. A player may
/// receive fewer than requested when the resource pool is too small.
pub fn random_strategy_sets<R: Rng + ?Sized>(
    shape: &ExplicitShape,
    rng: &mut R,
) -> Vec<Vec<Strategy>> {
    let size_cap = shape.max_strategy_size.clamp(1, shape.resources);
    let pool: Vec<usize> = (0..shape.resources).collect();
    (0..shape.players)
        .map(|_| {
            let mut set: Vec<Strategy> = Vec::with_capacity(shape.strategies_per_player);
            for _ in 0..shape.strategies_per_player * 20 {
                if set.len() == shape.strategies_per_player {
                    break;
                }
                let size = rng.random_range(1..=size_cap);
                let s = Strategy::new(pool.choose_multiple(rng, size).copied());
                if !set.contains(&s) {
                    set.push(s);
                }
            }
            set
        })
        .collect()
}

pub fn random_explicit_game<S: Scalar, R: Rng + ?Sized>(
    shape: &ExplicitShape,
    costs: CostShape,
    rng: &mut R,
) -> Result<Game<S>> {
    let sets = random_strategy_sets(shape, rng);
    let model = random_costs(costs, shape.players, shape.resources, rng)?;
    Game::explicit(shape.resources, sets, model)
}

/// Random directed multigraph on `nodes` nodes with `edges` edges. A chain
/// through a random node order is laid down first, and every od pair follows
/// that order, so all pairs are connected.
pub fn random_network<R: Rng + ?Sized>(
    nodes: usize,
    edges: usize,
    players: usize,
    rng: &mut R,
) -> Result<NetworkSpec> {
    if nodes < 2 || edges + 1 < nodes {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 nodes and nodes - 1 edges, got {nodes} nodes and {edges} edges"
        )));
    }
    let mut order: Vec<usize> = (0..nodes).collect();
    order.shuffle(rng);
    let mut list: Vec<Edge> = order
        .windows(2)
        .map(|w| Edge {
            tail: w[0],
            head: w[1],
        })
        .collect();
    while list.len() < edges {
        let tail = rng.random_range(0..nodes);
        let head = rng.random_range(0..nodes);
        if tail != head {
            list.push(Edge { tail, head });
        }
    }
    list.shuffle(rng);
    let od_pairs = (0..players)
        .map(|_| {
            let a = rng.random_range(0..nodes - 1);
            let b = rng.random_range(a + 1..nodes);
            (order[a], order[b])
        })
        .collect();
    Ok(NetworkSpec {
        nodes,
        edges: list,
        od_pairs,
    })
}

pub fn random_network_game<S: Scalar, R: Rng + ?Sized>(
    nodes: usize,
    edges: usize,
    players: usize,
    costs: CostShape,
    rng: &mut R,
) -> Result<Game<S>> {
    let net = random_network(nodes, edges, players, rng)?;
    let model = random_costs(costs, players, edges, rng)?;
    Game::network(net, model)
}

/// Every player on their first strategy (first simple path for networks).
pub fn lexicographic_profile<S: Scalar>(game: &Game<S>) -> StrategyProfile {
    match game.strategy_space() {
        StrategySpace::Explicit(sets) => {
            StrategyProfile(sets.iter().map(|s| s[0].clone()).collect())
        }
        StrategySpace::Network(net) => StrategyProfile(
            net.od_pairs
                .iter()
                .map(|&(o, d)| {
                    net.some_path::<rand_chacha::ChaCha8Rng>(o, d, None)
                        .expect("validated networks connect every od pair")
                        .to_strategy()
                })
                .collect(),
        ),
    }
}

/// Uniform strategy per player for explicit games; randomized-DFS paths for
/// networks.
pub fn random_profile<S: Scalar, R: Rng>(game: &Game<S>, rng: &mut R) -> StrategyProfile {
    match game.strategy_space() {
        StrategySpace::Explicit(sets) => StrategyProfile(
            sets.iter()
                .map(|s| s.choose(rng).expect("nonempty").clone())
                .collect(),
        ),
        StrategySpace::Network(net) => StrategyProfile(
            net.od_pairs
                .iter()
                .map(|&(o, d)| {
                    net.some_path(o, d, Some(&mut *rng))
                        .expect("validated networks connect every od pair")
                        .to_strategy()
                })
                .collect(),
        ),
    }
}

/// Highest-potential profile among `k` random ones (first wins ties).
pub fn worst_of_k_profile<S: Scalar, R: Rng>(
    game: &Game<S>,
    k: usize,
    rng: &mut R,
) -> StrategyProfile {
    let mut best: Option<(StrategyProfile, S)> = None;
    for _ in 0..k.max(1) {
        let s = random_profile(game, rng);
        let phi = game.potential_of_loads(&game.loads_unchecked(&s));
        if best.as_ref().is_none_or(|(_, b)| phi > *b) {
            best = Some((s, phi));
        }
    }
    best.expect("k >= 1").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_games_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shape = ExplicitShape {
            players: 4,
            resources: 5,
            strategies_per_player: 3,
            max_strategy_size: 3,
        };
        for costs in [
            CostShape::Tabular,
            CostShape::StepFunction { total_breaks: 9 },
            CostShape::Polynomial { degree: 3 },
            CostShape::CostSharing,
        ] {
            for _ in 0..50 {
                let g: Game<f64> = random_explicit_game(&shape, costs, &mut rng).unwrap();
                assert_eq!(g.kind(), costs.kind());
                let s = random_profile(&g, &mut rng);
                g.validate_profile(&s).unwrap();
                g.validate_profile(&lexicographic_profile(&g)).unwrap();
            }
        }
    }

    #[test]
    fn step_break_count_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c: CostModel<f64> =
            random_costs(CostShape::StepFunction { total_breaks: 8 }, 6, 6, &mut rng).unwrap();
        let CostModel::StepFunction(s) = c else {
            panic!()
        };
        assert_eq!(s.total_breaks(), 8);
        assert!(random_costs::<f64, _>(
            CostShape::StepFunction { total_breaks: 5 },
            6,
            6,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn generated_networks_connect_all_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g: Game<f64> =
                random_network_game(6, 10, 3, CostShape::CostSharing, &mut rng).unwrap();
            let s = random_profile(&g, &mut rng);
            g.validate_profile(&s).unwrap();
            let w = worst_of_k_profile(&g, 4, &mut rng);
            g.validate_profile(&w).unwrap();
        }
        assert!(random_network(4, 2, 1, &mut rng).is_err());
    }
}
