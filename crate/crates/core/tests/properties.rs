mod common;

use brdlab_core::generate::random_profile;
use brdlab_core::oracle::{direct_player_cost, direct_potential};
use brdlab_core::{
    CostModel, GameExact, ModelKind, Rational64, Strategy, StrategyProfile, TabularCosts,
};
use common::{rng, small_game, small_network};
use proptest::prelude::*;
use rand::seq::IndexedRandom;

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn exact_difference_identity(model in 0usize..4, seed: u64) {
        let g = small_game(model, seed, 10, 10, 4);
        let mut r = rng(seed ^ 0x5eed);
        let s = random_profile(&g, &mut r);
        let i = rand::Rng::random_range(&mut r, 0..g.players());
        let dev = g.strategy_set(i).unwrap().choose(&mut r).unwrap().clone();
        let (d_phi, d_cost) = g.potential_difference(&s, i, &dev).unwrap();
        prop_assert!((d_phi - d_cost).abs() <= TOL, "{d_phi} vs {d_cost}");
        // Independent recomputation of both sides.
        let next = s.with_deviation(i, dev);
        let oracle_phi = direct_potential(&g, &s) - direct_potential(&g, &next);
        let oracle_cost = direct_player_cost(&g, &s, i).unwrap() - direct_player_cost(&g, &next, i).unwrap();
        prop_assert!((oracle_phi - d_phi).abs() <= TOL);
        prop_assert!((oracle_cost - d_cost).abs() <= TOL);
    }

    #[test]
    fn loads_double_count(model in 0usize..4, seed: u64) {
        let g = small_game(model, seed, 8, 8, 3);
        let s = random_profile(&g, &mut rng(seed));
        let loads = g.compute_loads(&s).unwrap();
        let used: usize = s.choices().iter().map(Strategy::len).sum();
        prop_assert_eq!(loads.total(), used);
        prop_assert!(loads.loads().iter().all(|&l| l <= g.players()));
        prop_assert_eq!(g.compute_loads(&s).unwrap(), loads);
    }

    #[test]
    fn loads_ignore_player_identities(seed: u64) {
        // Symmetric strategy sets so that any permutation of choices stays valid.
        let g = small_game(0, seed, 6, 6, 3);
        let set = g.strategy_set(0).unwrap().to_vec();
        let sym = brdlab_core::Game64::explicit(g.resources(), vec![set; g.players()], g.costs().clone()).unwrap();
        let mut r = rng(seed);
        let s = random_profile(&sym, &mut r);
        let mut shuffled = s.choices().to_vec();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut r);
        let t = StrategyProfile(shuffled);
        prop_assert_eq!(sym.compute_loads(&s).unwrap(), sym.compute_loads(&t).unwrap());
        prop_assert!((sym.potential(&s).unwrap() - sym.potential(&t).unwrap()).abs() <= TOL);
    }

    #[test]
    fn costs_and_potential_within_bounds(model in 0usize..4, seed: u64) {
        let g = small_game(model, seed, 8, 8, 4);
        let s = random_profile(&g, &mut rng(seed));
        let lower = g.min_cost_lower_bound().unwrap();
        for i in 0..g.players() {
            prop_assert!(g.player_cost(&s, i).unwrap() + TOL >= lower);
        }
        let phi = g.potential(&s).unwrap();
        prop_assert!(phi >= 0.0);
        prop_assert!(phi <= g.potential_upper_bound() + TOL);
        // Every player uses at least one resource and every potential term is
        // at least the smallest cost any single resource can charge.
        let floor = g.players() as f64 * lower;
        prop_assert!(phi + TOL >= floor, "phi {phi} < {floor}");
    }

    #[test]
    fn monotone_cost_shapes(model in 1usize..4, seed: u64) {
        let g = small_game(model, seed, 10, 6, 2);
        for r in 0..g.resources() {
            let row = g.cost_row(r);
            for w in row.windows(2) {
                match g.kind() {
                    ModelKind::CostSharing => prop_assert!(w[1] < w[0]),
                    _ => prop_assert!(w[1] >= w[0]),
                }
            }
        }
    }

    #[test]
    fn potential_is_a_function_of_loads(model in 0usize..4, seed: u64) {
        let g = small_game(model, seed, 6, 6, 4);
        let mut r = rng(seed);
        let a = random_profile(&g, &mut r);
        let b = random_profile(&g, &mut r);
        let la = g.compute_loads(&a).unwrap();
        if la == g.compute_loads(&b).unwrap() {
            prop_assert_eq!(g.potential(&a).unwrap(), g.potential(&b).unwrap());
        }
        prop_assert_eq!(g.potential(&a).unwrap(), g.potential_of_loads(&la));
    }

    #[test]
    fn network_identity(model in 0usize..4, seed: u64) {
        let g = small_network(model, seed);
        let mut r = rng(seed);
        let s = random_profile(&g, &mut r);
        let alt = random_profile(&g, &mut r);
        let i = rand::Rng::random_range(&mut r, 0..g.players());
        let (d_phi, d_cost) = g.potential_difference(&s, i, alt.player(i)).unwrap();
        prop_assert!((d_phi - d_cost).abs() <= TOL);
    }
}

#[test]
fn identity_is_exact_over_rationals() {
    let q = |a, b| Rational64::new(a, b);
    let both = vec![
        Strategy::from([0]),
        Strategy::from([1]),
        Strategy::from([0, 2]),
    ];
    let g = GameExact::explicit(
        3,
        vec![both.clone(), both.clone(), both],
        CostModel::Tabular(TabularCosts {
            table: vec![
                vec![q(1, 5), q(1, 2), q(2, 3)],
                vec![q(3, 10), q(2, 5), q(1, 7)],
                vec![q(1, 9), q(1, 1), q(1, 3)],
            ],
        }),
    )
    .unwrap();
    let sets = g.strategy_set(0).unwrap().to_vec();
    for a in &sets {
        for b in &sets {
            for c in &sets {
                let s = StrategyProfile(vec![a.clone(), b.clone(), c.clone()]);
                for i in 0..3 {
                    for dev in &sets {
                        let (d_phi, d_cost) = g.potential_difference(&s, i, dev).unwrap();
                        assert_eq!(d_phi, d_cost);
                    }
                }
            }
        }
    }
}

#[test]
fn f32_games_run() {
    use brdlab_core::{run_brd, BrdConfig, Game32, PivotRule, Status};
    let both = vec![Strategy::from([0]), Strategy::from([1])];
    let g = Game32::explicit(
        2,
        vec![both.clone(), both],
        CostModel::Tabular(TabularCosts {
            table: vec![vec![0.2, 0.5], vec![0.3, 0.4]],
        }),
    )
    .unwrap();
    let s = StrategyProfile(vec![Strategy::from([0]), Strategy::from([0])]);
    let t = run_brd(&g, &s, &BrdConfig::new(0.2, PivotRule::MaxGain)).unwrap();
    assert_eq!(t.status, Status::Converged);
    assert_eq!(t.iterations(), 1);
}
