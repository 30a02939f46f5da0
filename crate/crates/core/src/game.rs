//! Congestion games, strategy profiles and loads.

use crate::cost::{CostModel, ModelKind};
use crate::error::{Error, Result, Subject, Violation};
use crate::network::NetworkSpec;
use crate::scalar::Scalar;

pub type PlayerId = usize;
pub type ResourceId = usize;

/// A nonempty set of resources, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy(Vec<ResourceId>);

impl Strategy {
    pub fn new(resources: impl IntoIterator<Item = ResourceId>) -> Self {
        let mut v: Vec<_> = resources.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Strategy(v)
    }

    pub fn resources(&self) -> &[ResourceId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: ResourceId) -> bool {
        self.0.binary_search(&r).is_ok()
    }
}

impl<const N: usize> From<[ResourceId; N]> for Strategy {
    fn from(rs: [ResourceId; N]) -> Self {
        Strategy::new(rs)
    }
}

/// One strategy per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile(pub Vec<Strategy>);

impl StrategyProfile {
    pub fn choices(&self) -> &[Strategy] {
        &self.0
    }

    pub fn player(&self, i: PlayerId) -> &Strategy {
        &self.0[i]
    }

    /// `(s_i', s_{-i})`.
    pub fn with_deviation(&self, i: PlayerId, deviation: Strategy) -> Self {
        let mut next = self.clone();
        next.0[i] = deviation;
        next
    }
}

impl<const N: usize> From<[Strategy; N]> for StrategyProfile {
    fn from(s: [Strategy; N]) -> Self {
        StrategyProfile(s.to_vec())
    }
}

/// Per-resource player counts `ℓ_r(s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoadProfile(pub Vec<usize>);

impl LoadProfile {
    pub fn loads(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// How the players' strategy sets are represented.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpace {
    /// Explicit per-player lists of strategies.
    Explicit(Vec<Vec<Strategy>>),
    /// Simple origin-destination paths over a directed multigraph whose
    /// edges are the resources.
    Network(NetworkSpec),
}

impl StrategySpace {
    pub fn players(&self) -> usize {
        match self {
            StrategySpace::Explicit(sets) => sets.len(),
            StrategySpace::Network(net) => net.od_pairs.len(),
        }
    }
}

/// Checks every structural invariant of a game assembled from parts.
///
/// Returns all findings rather than stopping at the first one.
pub fn validate_game<S: Scalar>(
    resources: usize,
    space: &StrategySpace,
    costs: &CostModel<S>,
) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = space.players();
    if n == 0 {
        out.push(Violation::new(Subject::Game, "game has no players"));
    }
    if resources == 0 {
        out.push(Violation::new(Subject::Game, "game has no resources"));
    }
    match space {
        StrategySpace::Explicit(sets) => {
            for (i, set) in sets.iter().enumerate() {
                let who = Subject::Player(i);
                if set.is_empty() {
                    out.push(Violation::new(who, "strategy set is empty"));
                }
                for (k, s) in set.iter().enumerate() {
                    if s.is_empty() {
                        out.push(Violation::new(who, format!("strategy {} is empty", k + 1)));
                    }
                    if let Some(&r) = s.resources().iter().find(|&&r| r >= resources) {
                        out.push(Violation::new(
                            who,
                            format!("strategy {} uses unknown resource {}", k + 1, r + 1),
                        ));
                    }
                    if set[..k].contains(s) {
                        out.push(Violation::new(
                            who,
                            format!("strategy {} is a duplicate", k + 1),
                        ));
                    }
                }
            }
        }
        StrategySpace::Network(net) => {
            if net.edges.len() != resources {
                out.push(Violation::new(
                    Subject::Game,
                    format!(
                        "network has {} edges, game has {resources} resources",
                        net.edges.len()
                    ),
                ));
            }
            out.extend(net.validate());
        }
    }
    if n > 0 {
        out.extend(costs.validate(n, resources));
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A validated congestion game.
///
/// Resource costs for every load are tabulated at construction together with
/// their prefix sums, so evaluating a cost or a potential term is a lookup.
#[derive(Debug, Clone)]
pub struct Game<S> {
    n: usize,
    m: usize,
    space: StrategySpace,
    costs: CostModel<S>,
    /// `values[r * n + ℓ - 1] = c_r(ℓ)`
    values: Vec<S>,
    /// `prefix[r * (n + 1) + ℓ] = Σ_{j ≤ ℓ} c_r(j)`
    prefix: Vec<S>,
}

impl<S: Scalar> PartialEq for Game<S> {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.space == other.space && self.costs == other.costs
    }
}

impl<S: Scalar> Game<S> {
    pub fn new(resources: usize, space: StrategySpace, costs: CostModel<S>) -> Result<Self> {
        validate_game(resources, &space, &costs).map_err(Error::InvalidGame)?;
        let n = space.players();
        let m = resources;
        let mut values = Vec::with_capacity(n * m);
        let mut prefix = Vec::with_capacity((n + 1) * m);
        for r in 0..m {
            let mut acc = S::zero();
            prefix.push(acc);
            for load in 1..=n {
                let c = costs.resource_cost(r, load, n)?;
                values.push(c);
                acc += c;
                prefix.push(acc);
            }
        }
        Ok(Game {
            n,
            m,
            space,
            costs,
            values,
            prefix,
        })
    }

    pub fn explicit(
        resources: usize,
        sets: Vec<Vec<Strategy>>,
        costs: CostModel<S>,
    ) -> Result<Self> {
        Self::new(resources, StrategySpace::Explicit(sets), costs)
    }

    pub fn network(spec: NetworkSpec, costs: CostModel<S>) -> Result<Self> {
        let m = spec.edges.len();
        Self::new(m, StrategySpace::Network(spec), costs)
    }

    /// Same structure with different cost parameters.
    pub fn with_costs(&self, costs: CostModel<S>) -> Result<Self> {
        Self::new(self.m, self.space.clone(), costs)
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn resources(&self) -> usize {
        self.m
    }

    pub fn strategy_space(&self) -> &StrategySpace {
        &self.space
    }

    pub fn costs(&self) -> &CostModel<S> {
        &self.costs
    }

    pub fn kind(&self) -> ModelKind {
        self.costs.kind()
    }

    pub fn is_network(&self) -> bool {
        matches!(self.space, StrategySpace::Network(_))
    }

    pub fn network_spec(&self) -> Option<&NetworkSpec> {
        match &self.space {
            StrategySpace::Network(net) => Some(net),
            StrategySpace::Explicit(_) => None,
        }
    }

    /// Explicit strategy set of player `i`, if the game has one.
    pub fn strategy_set(&self, i: PlayerId) -> Option<&[Strategy]> {
        match &self.space {
            StrategySpace::Explicit(sets) => sets.get(i).map(Vec::as_slice),
            StrategySpace::Network(_) => None,
        }
    }

    /// Tabulated `c_r(load)` for `1 ≤ load ≤ n`.
    #[inline]
    pub fn cost(&self, r: ResourceId, load: usize) -> S {
        debug_assert!(load >= 1 && load <= self.n);
        self.values[r * self.n + load - 1]
    }

    /// `Σ_{j=1}^{load} c_r(j)`.
    #[inline]
    pub fn cumulative_cost(&self, r: ResourceId, load: usize) -> S {
        self.prefix[r * (self.n + 1) + load]
    }

    /// Per-resource costs at every load, `c_r(1..=n)`.
    pub fn cost_row(&self, r: ResourceId) -> &[S] {
        &self.values[r * self.n..(r + 1) * self.n]
    }

    pub fn check_player(&self, i: PlayerId) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::PlayerOutOfRange {
                player: i,
                n: self.n,
            })
        }
    }

    /// Checks `s ∈ S_i` (membership for explicit games, path validity for
    /// network games).
    pub fn validate_strategy(&self, i: PlayerId, s: &Strategy) -> Result<()> {
        self.check_player(i)?;
        match &self.space {
            StrategySpace::Explicit(sets) => {
                if sets[i].contains(s) {
                    Ok(())
                } else {
                    Err(Error::InvalidProfile {
                        player: i,
                        reason: "strategy is not in the player's strategy set".into(),
                    })
                }
            }
            StrategySpace::Network(net) => net
                .path_from_edges(i, s)
                .map(|_| ())
                .map_err(|reason| Error::InvalidProfile { player: i, reason }),
        }
    }

    pub fn validate_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.0.len() != self.n {
            return Err(Error::ProfileLength {
                expected: self.n,
                got: profile.0.len(),
            });
        }
        profile
            .0
            .iter()
            .enumerate()
            .try_for_each(|(i, s)| self.validate_strategy(i, s))
    }

    /// Loads of a profile already known to be valid.
    pub(crate) fn loads_unchecked(&self, profile: &StrategyProfile) -> LoadProfile {
        let mut loads = vec![0usize; self.m];
        for s in &profile.0 {
            for &r in s.resources() {
                loads[r] += 1;
            }
        }
        LoadProfile(loads)
    }

    pub fn compute_loads(&self, profile: &StrategyProfile) -> Result<LoadProfile> {
        self.validate_profile(profile)?;
        Ok(self.loads_unchecked(profile))
    }

    /// `C_i(s) = Σ_{r ∈ s_i} c_r(ℓ_r(s))`.
    pub fn player_cost(&self, profile: &StrategyProfile, i: PlayerId) -> Result<S> {
        self.check_player(i)?;
        let loads = self.compute_loads(profile)?;
        Ok(self.cost_at(&loads.0, &profile.0[i]))
    }

    /// Cost of a strategy that is already counted in `loads`.
    #[inline]
    pub(crate) fn cost_at(&self, loads: &[usize], s: &Strategy) -> S {
        s.resources()
            .iter()
            .fold(S::zero(), |acc, &r| acc + self.cost(r, loads[r]))
    }

    /// `C_i(s', s_{-i})` where `current` is the strategy counted in `loads`.
    #[inline]
    pub(crate) fn deviation_cost(
        &self,
        loads: &[usize],
        current: &Strategy,
        deviation: &Strategy,
    ) -> S {
        let cur = current.resources();
        let mut k = 0;
        let mut acc = S::zero();
        for &r in deviation.resources() {
            while k < cur.len() && cur[k] < r {
                k += 1;
            }
            let already = k < cur.len() && cur[k] == r;
            let load = if already { loads[r] } else { loads[r] + 1 };
            acc += self.cost(r, load);
        }
        acc
    }

    /// Rosenthal potential `Φ(s) = Σ_r Σ_{j=1}^{ℓ_r(s)} c_r(j)`.
    pub fn potential(&self, profile: &StrategyProfile) -> Result<S> {
        let loads = self.compute_loads(profile)?;
        Ok(self.potential_of_loads(&loads))
    }

    /// The potential depends on the loads alone.
    pub fn potential_of_loads(&self, loads: &LoadProfile) -> S {
        loads
            .0
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (r, &l)| acc + self.cumulative_cost(r, l))
    }

    /// `(Φ(s) − Φ(s'), C_i(s) − C_i(s'))` for `s' = (deviation, s_{-i})`,
    /// each side recomputed from scratch. The two agree exactly in exact
    /// arithmetic.
    pub fn potential_difference(
        &self,
        profile: &StrategyProfile,
        i: PlayerId,
        deviation: &Strategy,
    ) -> Result<(S, S)> {
        self.validate_profile(profile)?;
        self.validate_strategy(i, deviation)?;
        let next = profile.with_deviation(i, deviation.clone());
        let d_phi = self.potential(profile)? - self.potential(&next)?;
        let d_cost = self.player_cost(profile, i)? - self.player_cost(&next, i)?;
        Ok((d_phi, d_cost))
    }

    pub fn potential_upper_bound(&self) -> S {
        self.costs.potential_upper_bound(self.n, self.m)
    }

    pub fn min_cost_lower_bound(&self) -> Result<S> {
        self.costs.min_cost_lower_bound(self.n)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::cost::TabularCosts;

    /// Two players, two singleton resources, `c_1 = (0.2, 0.5)`,
    /// `c_2 = (0.3, 0.4)`.
    pub fn g1() -> Game<f64> {
        let both = vec![Strategy::from([0]), Strategy::from([1])];
        Game::explicit(
            2,
            vec![both.clone(), both],
            CostModel::Tabular(TabularCosts {
                table: vec![vec![0.2, 0.5], vec![0.3, 0.4]],
            }),
        )
        .unwrap()
    }

    pub fn profile(choices: &[usize]) -> StrategyProfile {
        StrategyProfile(choices.iter().map(|&r| Strategy::from([r])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::cost::TabularCosts;
    use approx::assert_abs_diff_eq;

    #[test]
    fn loads_count_users() {
        let g = g1();
        assert_eq!(g.compute_loads(&profile(&[0, 0])).unwrap().0, vec![2, 0]);
        assert_eq!(g.compute_loads(&profile(&[0, 1])).unwrap().0, vec![1, 1]);
    }

    #[test]
    fn player_costs_of_g1() {
        let g = g1();
        assert_abs_diff_eq!(
            g.player_cost(&profile(&[0, 0]), 0).unwrap(),
            0.5,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            g.player_cost(&profile(&[0, 1]), 1).unwrap(),
            0.3,
            epsilon = 1e-9
        );
    }

    #[test]
    fn single_player_on_everything_pays_unit_load_costs() {
        let table = vec![vec![0.1], vec![0.25], vec![0.4]];
        let g = Game::explicit(
            3,
            vec![vec![Strategy::from([0, 1, 2])]],
            CostModel::Tabular(TabularCosts { table }),
        )
        .unwrap();
        let s = StrategyProfile(vec![Strategy::from([0, 1, 2])]);
        assert_abs_diff_eq!(g.player_cost(&s, 0).unwrap(), 0.75, epsilon = 1e-9);
    }

    #[test]
    fn potential_of_g1() {
        let g = g1();
        assert_abs_diff_eq!(g.potential(&profile(&[0, 0])).unwrap(), 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(g.potential(&profile(&[0, 1])).unwrap(), 0.5, epsilon = 1e-9);
        assert_eq!(g.potential_of_loads(&LoadProfile(vec![0, 0])), 0.0);
    }

    #[test]
    fn potential_difference_examples() {
        let g = g1();
        let (dp, dc) = g
            .potential_difference(&profile(&[0, 0]), 1, &Strategy::from([1]))
            .unwrap();
        assert_abs_diff_eq!(dp, 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(dc, 0.2, epsilon = 1e-9);
        let (dp, dc) = g
            .potential_difference(&profile(&[0, 1]), 0, &Strategy::from([0]))
            .unwrap();
        assert_eq!((dp, dc), (0.0, 0.0));
    }

    #[test]
    fn bounds_of_g1() {
        let g = g1();
        assert_abs_diff_eq!(g.potential_upper_bound(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.min_cost_lower_bound().unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn invalid_profiles_name_the_player() {
        let g = g1();
        let bad = StrategyProfile(vec![Strategy::from([0]), Strategy::from([0, 1])]);
        match g.compute_loads(&bad) {
            Err(Error::InvalidProfile { player, .. }) => assert_eq!(player, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            g.player_cost(&profile(&[0, 1]), 2),
            Err(Error::PlayerOutOfRange { .. })
        ));
        assert!(matches!(
            g.compute_loads(&profile(&[0])),
            Err(Error::ProfileLength {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn validate_game_reports_empty_strategy_sets() {
        let costs = CostModel::Tabular(TabularCosts {
            table: vec![vec![0.2, 0.5], vec![0.3, 0.4]],
        });
        assert!(validate_game(2, g1().strategy_space(), &costs).is_ok());
        let space = StrategySpace::Explicit(vec![vec![Strategy::from([0])], vec![]]);
        let v = validate_game(2, &space, &costs).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, Subject::Player(1));
        assert!(v[0].to_string().contains("player 2"));
    }

    #[test]
    fn validate_game_reports_short_tables() {
        let costs = CostModel::Tabular(TabularCosts {
            table: vec![vec![0.2, 0.5], vec![0.3]],
        });
        let v = validate_game(2, g1().strategy_space(), &costs).unwrap_err();
        assert_eq!(v[0].subject, Subject::Resource(1));
    }

    #[test]
    fn validate_game_rejects_duplicates_and_unknown_resources() {
        let costs = CostModel::Tabular(TabularCosts {
            table: vec![vec![0.2]],
        });
        let space = StrategySpace::Explicit(vec![vec![
            Strategy::from([0]),
            Strategy::from([0]),
            Strategy::from([3]),
        ]]);
        let v = validate_game(1, &space, &costs).unwrap_err();
        assert_eq!(v.len(), 2, "{v:?}");
    }

    #[test]
    fn strategies_are_sorted_sets() {
        let s = Strategy::new([3, 1, 3, 2]);
        assert_eq!(s.resources(), &[1, 2, 3]);
        assert!(s.contains(2) && !s.contains(0));
    }

    #[test]
    fn deviation_cost_matches_recomputation() {
        let g = g1();
        let s = profile(&[0, 0]);
        let loads = g.compute_loads(&s).unwrap();
        let dev = Strategy::from([1]);
        let direct = g.player_cost(&s.with_deviation(1, dev.clone()), 1).unwrap();
        assert_eq!(g.deviation_cost(&loads.0, s.player(1), &dev), direct);
        assert_eq!(g.deviation_cost(&loads.0, s.player(1), s.player(1)), 0.5);
    }
}
