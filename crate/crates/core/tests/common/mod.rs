#![allow(dead_code)]

use brdlab_core::generate::{random_explicit_game, random_network_game, CostShape, ExplicitShape};
use brdlab_core::Game64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A cost shape of the given model kind sized for `n` players and `m`
/// resources.
pub fn shape_for(model: usize, n: usize, m: usize, rng: &mut ChaCha8Rng) -> CostShape {
    use rand::Rng;
    match model % 4 {
        0 => CostShape::Tabular,
        1 => CostShape::StepFunction {
            total_breaks: rng.random_range(m..=m * n),
        },
        2 => CostShape::Polynomial {
            degree: rng.random_range(0..=3),
        },
        _ => CostShape::CostSharing,
    }
}

/// Small random explicit game of the given model.
pub fn small_game(model: usize, seed: u64, max_n: usize, max_m: usize, max_k: usize) -> Game64 {
    use rand::Rng;
    let mut r = rng(seed);
    let n = r.random_range(1..=max_n);
    let m = r.random_range(1..=max_m);
    let k = r.random_range(1..=max_k);
    let shape = ExplicitShape {
        players: n,
        resources: m,
        strategies_per_player: k,
        max_strategy_size: 3,
    };
    let costs = shape_for(model, n, m, &mut r);
    random_explicit_game(&shape, costs, &mut r).expect("generator produces valid games")
}

pub fn small_network(model: usize, seed: u64) -> Game64 {
    use rand::Rng;
    let mut r = rng(seed);
    let nodes = r.random_range(2..=6);
    let edges = r.random_range(nodes - 1..=10);
    let players = r.random_range(1..=3);
    let costs = shape_for(model, players, edges, &mut r);
    random_network_game(nodes, edges, players, costs, &mut r).expect("valid network")
}
