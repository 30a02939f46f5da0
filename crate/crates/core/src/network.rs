//! Network congestion games: strategies are simple origin-destination paths
//! in a directed multigraph whose edges are the resources.
//!
//! Best responses are shortest-path queries, so the (possibly exponential)
//! path sets are never materialized outside the enumeration oracle.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result, Subject, Violation};
use crate::game::{Game, PlayerId, ResourceId, Strategy, StrategyProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

/// Directed multigraph with one origin-destination pair per player. Edge `k`
/// is resource `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub od_pairs: Vec<(usize, usize)>,
}

/// Edge sequence of a simple path, in travel order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathStrategy(pub Vec<ResourceId>);

impl PathStrategy {
    pub fn edges(&self) -> &[ResourceId] {
        &self.0
    }

    /// The path as an (unordered) resource set.
    pub fn to_strategy(&self) -> Strategy {
        Strategy::new(self.0.iter().copied())
    }
}

impl NetworkSpec {
    /// Out-edges per node, in increasing edge index.
    pub fn out_edges(&self) -> Vec<Vec<ResourceId>> {
        let mut out = vec![Vec::new(); self.nodes];
        for (k, e) in self.edges.iter().enumerate() {
            if e.tail < self.nodes {
                out[e.tail].push(k);
            }
        }
        out
    }

    pub fn reachable(&self, from: usize, to: usize) -> bool {
        let out = self.out_edges();
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                return true;
            }
            for &k in &out[u] {
                let v = self.edges[k].head;
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if e.tail >= self.nodes || e.head >= self.nodes {
                out.push(Violation::new(
                    Subject::Resource(k),
                    format!(
                        "edge ({}, {}) leaves the node range 0..{}",
                        e.tail, e.head, self.nodes
                    ),
                ));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (i, &(o, d)) in self.od_pairs.iter().enumerate() {
            let who = Subject::Player(i);
            if o >= self.nodes || d >= self.nodes {
                out.push(Violation::new(
                    who,
                    format!("od pair ({o}, {d}) leaves the node range"),
                ));
            } else if o == d {
                out.push(Violation::new(who, "origin equals destination"));
            } else if !self.reachable(o, d) {
                out.push(Violation::new(
                    who,
                    format!("destination {d} unreachable from origin {o}"),
                ));
            }
        }
        out
    }

    /// Recovers the travel order of a resource set that should form a simple
    /// `o_i → d_i` path.
    pub fn path_from_edges(
        &self,
        i: PlayerId,
        s: &Strategy,
    ) -> std::result::Result<PathStrategy, String> {
        let (o, d) = *self.od_pairs.get(i).ok_or("no od pair for player")?;
        if s.is_empty() {
            return Err("empty path".into());
        }
        let mut next = vec![None; self.nodes];
        for &k in s.resources() {
            let e = self
                .edges
                .get(k)
                .ok_or_else(|| format!("unknown edge {}", k + 1))?;
            if next[e.tail].replace(k).is_some() {
                return Err(format!("two path edges leave node {}", e.tail));
            }
        }
        let mut seen = vec![false; self.nodes];
        let mut path = Vec::with_capacity(s.len());
        let mut at = o;
        seen[o] = true;
        while at != d {
            let k =
                next[at].ok_or_else(|| format!("path stops at node {at} before reaching {d}"))?;
            path.push(k);
            at = self.edges[k].head;
            if std::mem::replace(&mut seen[at], true) {
                return Err(format!("path revisits node {at}"));
            }
        }
        if path.len() != s.len() {
            return Err("edges left over after reaching the destination".into());
        }
        Ok(PathStrategy(path))
    }

    /// All simple `o → d` paths, lexicographic by edge-index sequence.
    ///
    /// Fails once more than `cap` paths are found.
    pub fn enumerate_simple_paths(
        &self,
        o: usize,
        d: usize,
        cap: usize,
    ) -> Result<Vec<PathStrategy>> {
        if cap == 0 {
            return Err(Error::InvalidParameter(
                "path cap must be at least 1".into(),
            ));
        }
        let out = self.out_edges();
        let mut found = Vec::new();
        let mut on_path = vec![false; self.nodes];
        let mut stack = Vec::new();
        on_path[o] = true;
        self.dfs(&out, o, d, cap, &mut on_path, &mut stack, &mut found)?;
        Ok(found)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        out: &[Vec<ResourceId>],
        at: usize,
        d: usize,
        cap: usize,
        on_path: &mut [bool],
        stack: &mut Vec<ResourceId>,
        found: &mut Vec<PathStrategy>,
    ) -> Result<()> {
        if at == d {
            if found.len() == cap {
                return Err(Error::PathExplosion { cap });
            }
            found.push(PathStrategy(stack.clone()));
            return Ok(());
        }
        for &k in &out[at] {
            let v = self.edges[k].head;
            if on_path[v] {
                continue;
            }
            on_path[v] = true;
            stack.push(k);
            self.dfs(out, v, d, cap, on_path, stack, found)?;
            stack.pop();
            on_path[v] = false;
        }
        Ok(())
    }

    /// Lexicographically first simple path, or a randomized-DFS path when an
    /// rng is supplied. The randomized variant is not uniform over paths.
    pub fn some_path<R: Rng>(
        &self,
        o: usize,
        d: usize,
        rng: Option<&mut R>,
    ) -> Option<PathStrategy> {
        let out = self.out_edges();
        let mut on_path = vec![false; self.nodes];
        let mut stack = Vec::new();
        on_path[o] = true;
        let mut rng = rng;
        fn go<R: Rng>(
            net: &NetworkSpec,
            out: &[Vec<ResourceId>],
            at: usize,
            d: usize,
            on_path: &mut [bool],
            stack: &mut Vec<ResourceId>,
            rng: &mut Option<&mut R>,
        ) -> bool {
            if at == d {
                return true;
            }
            let mut order = out[at].clone();
            if let Some(r) = rng.as_deref_mut() {
                order.shuffle(r);
            }
            for k in order {
                let v = net.edges[k].head;
                if on_path[v] {
                    continue;
                }
                on_path[v] = true;
                stack.push(k);
                if go(net, out, v, d, on_path, stack, rng) {
                    return true;
                }
                stack.pop();
                on_path[v] = false;
            }
            false
        }
        go(self, &out, o, d, &mut on_path, &mut stack, &mut rng).then_some(PathStrategy(stack))
    }
}

#[derive(Clone, Copy)]
struct Frontier<S> {
    dist: S,
    node: usize,
}

impl<S: Scalar> PartialEq for Frontier<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Scalar> Eq for Frontier<S> {}

impl<S: Scalar> PartialOrd for Frontier<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for Frontier<S> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dijkstra from `o` to `d` with edge weights `c_e(ℓ_e(s_{-i}) + 1)`, where
/// `loads` counts `current` (player i's strategy).
///
/// Among equal-distance predecessors the smaller incoming edge index wins.
pub(crate) fn shortest_path<S: Scalar>(
    game: &Game<S>,
    net: &NetworkSpec,
    loads: &[usize],
    current: &Strategy,
    o: usize,
    d: usize,
) -> Option<(PathStrategy, S)> {
    let nodes = net.nodes;
    let mut dist: Vec<Option<S>> = vec![None; nodes];
    let mut pred: Vec<Option<ResourceId>> = vec![None; nodes];
    let mut settled = vec![false; nodes];
    let out = net.out_edges();
    let mut heap = BinaryHeap::new();
    dist[o] = Some(S::zero());
    heap.push(Frontier {
        dist: S::zero(),
        node: o,
    });
    while let Some(Frontier { dist: du, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == d {
            break;
        }
        for &k in &out[u] {
            let v = net.edges[k].head;
            if settled[v] {
                continue;
            }
            let load = if current.contains(k) {
                loads[k]
            } else {
                loads[k] + 1
            };
            let alt = du + game.cost(k, load);
            let better = match (dist[v], pred[v]) {
                (None, _) => true,
                (Some(dv), p) => alt < dv || (alt == dv && p.is_some_and(|p| k < p)),
            };
            if better {
                dist[v] = Some(alt);
                pred[v] = Some(k);
                heap.push(Frontier { dist: alt, node: v });
            }
        }
    }
    let total = dist[d]?;
    let mut path = Vec::new();
    let mut at = d;
    while at != o {
        let k = pred[at]?;
        path.push(k);
        at = net.edges[k].tail;
    }
    path.reverse();
    Some((PathStrategy(path), total))
}

/// Best response of player `i` in a network game together with its cost
/// `C_i(path, s_{-i})`.
pub fn network_best_response<S: Scalar>(
    game: &Game<S>,
    profile: &StrategyProfile,
    i: PlayerId,
) -> Result<(PathStrategy, S)> {
    let net = game.network_spec().ok_or_else(|| {
        Error::InvalidParameter("game does not have a network representation".into())
    })?;
    game.check_player(i)?;
    let loads = game.compute_loads(profile)?;
    let (o, d) = net.od_pairs[i];
    shortest_path(game, net, &loads.0, profile.player(i), o, d)
        .ok_or(Error::Unreachable { player: i })
}
