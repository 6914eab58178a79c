//! Domain walls on the brickwork lattice as minimal cuts.
//!
//! Every gate is a node; each site also has a bottom node (initial slice)
//! and a top node (final slice). Consecutive nodes on a site's worldline are
//! joined by a leg of unit cost. A domain wall is a set of cut legs, and its
//! length is the number of legs it crosses.

use std::collections::VecDeque;

use petgraph::algo::dinics;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;
use serde::{Deserialize, Serialize};

use crate::densesim::brickwork_pairs;
use crate::error::{Error, Result};

/// Largest number of gate nodes accepted.
pub const LATTICE_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Bottom(usize),
    Top(usize),
    Gate { layer: usize, left: usize },
}

/// A worldline segment: `segment` counts the gates on `site` below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub ends: (usize, usize),
    pub site: usize,
    pub segment: usize,
}

#[derive(Debug, Clone)]
pub struct BrickworkGraph {
    n_sites: usize,
    depth: usize,
    nodes: Vec<NodeKind>,
    legs: Vec<Leg>,
}

impl BrickworkGraph {
    pub fn new(n_sites: usize, depth: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Validation("lattice needs at least one site".into()));
        }
        let gates = depth.saturating_mul(n_sites / 2);
        if gates > LATTICE_GUARD {
            return Err(Error::Guard {
                what: "gate nodes in the cut lattice",
                needed: gates as u128,
                limit: LATTICE_GUARD as u128,
            });
        }
        let mut nodes: Vec<NodeKind> = (0..n_sites).map(NodeKind::Bottom).collect();
        let mut last: Vec<usize> = (0..n_sites).collect();
        let mut segment = vec![0usize; n_sites];
        let mut legs = Vec::new();
        let link = |legs: &mut Vec<Leg>, last: &mut [usize], seg: &mut [usize], s: usize, node| {
            legs.push(Leg {
                ends: (last[s], node),
                site: s,
                segment: seg[s],
            });
            last[s] = node;
            seg[s] += 1;
        };
        for layer in 0..depth {
            for (i, j) in brickwork_pairs(n_sites, layer) {
                let g = nodes.len();
                nodes.push(NodeKind::Gate { layer, left: i });
                link(&mut legs, &mut last, &mut segment, i, g);
                link(&mut legs, &mut last, &mut segment, j, g);
            }
        }
        for s in 0..n_sites {
            let top = nodes.len();
            nodes.push(NodeKind::Top(s));
            link(&mut legs, &mut last, &mut segment, s, top);
        }
        Ok(BrickworkGraph {
            n_sites,
            depth,
            nodes,
            legs,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn bottom(&self, site: usize) -> usize {
        site
    }

    pub fn top(&self, site: usize) -> usize {
        self.nodes.len() - self.n_sites + site
    }

    pub fn is_gate(&self, node: usize) -> bool {
        matches!(self.nodes[node], NodeKind::Gate { .. })
    }
}

/// Constraint on one node for a two-sided cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Sink,
    Free,
}

/// A minimal cut with its witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub value: usize,
    /// Smallest optimal source side.
    pub source_side: Vec<bool>,
    /// Indices into [`BrickworkGraph::legs`] of the cut legs.
    pub legs: Vec<usize>,
}

/// Minimal number of legs separating the `Source` nodes from the `Sink`
/// nodes, with `Free` nodes placed optimally.
pub fn min_cut(graph: &BrickworkGraph, sides: &[Side]) -> Result<Cut> {
    let n = graph.nodes.len();
    if sides.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sides.len(),
        });
    }
    let big = graph.legs.len() as u64 + 1;
    let mut net: DiGraph<(), u64> = DiGraph::with_capacity(n + 2, 2 * graph.legs.len() + n);
    for _ in 0..n + 2 {
        net.add_node(());
    }
    let (src, dst) = (NodeIndex::new(n), NodeIndex::new(n + 1));
    for leg in &graph.legs {
        let (a, b) = (NodeIndex::new(leg.ends.0), NodeIndex::new(leg.ends.1));
        net.add_edge(a, b, 1);
        net.add_edge(b, a, 1);
    }
    for (i, side) in sides.iter().enumerate() {
        match side {
            Side::Source => {
                net.add_edge(src, NodeIndex::new(i), big);
            }
            Side::Sink => {
                net.add_edge(NodeIndex::new(i), dst, big);
            }
            Side::Free => {}
        }
    }
    let (value, flows) = dinics(&net, src, dst);
    if value >= big {
        return Err(Error::Validation(
            "a node is constrained to both sides of the cut".into(),
        ));
    }

    // Residual reachability from the source gives the smallest source side.
    let mut reach = vec![false; n + 2];
    reach[n] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for e in net.edges_directed(u, petgraph::Direction::Outgoing) {
            let v = e.target();
            if !reach[v.index()] && flows[e.id().index()] < *e.weight() {
                reach[v.index()] = true;
                queue.push_back(v);
            }
        }
        for e in net.edges_directed(u, petgraph::Direction::Incoming) {
            let v = e.source();
            if !reach[v.index()] && flows[e.id().index()] > 0 {
                reach[v.index()] = true;
                queue.push_back(v);
            }
        }
    }
    reach.truncate(n);
    let legs: Vec<usize> = graph
        .legs
        .iter()
        .enumerate()
        .filter(|(_, l)| reach[l.ends.0] != reach[l.ends.1])
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(legs.len() as u64, value);
    Ok(Cut {
        value: value as usize,
        source_side: reach,
        legs,
    })
}

/// The three boundary spins that matter at large q, ordered along a line:
/// `|Ī, X| = n - 1`, `|X, I| = n`, `|Ī, I| = 2n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    AntiIdentity,
    MultiSwap,
    Identity,
}

impl Spin {
    pub const ALL: [Spin; 3] = [Spin::AntiIdentity, Spin::MultiSwap, Spin::Identity];

    /// Replica distance to `other` on `2n` copies.
    pub fn distance(self, other: Spin, n: usize) -> usize {
        let pos = |s: Spin| match s {
            Spin::AntiIdentity => 0,
            Spin::MultiSwap => n - 1,
            Spin::Identity => 2 * n - 1,
        };
        pos(self).abs_diff(pos(other))
    }
}

/// Allowed spins at a node; always a nonempty interval of the line
/// `Ī < X < I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinSet {
    lo: Spin,
    hi: Spin,
}

impl SpinSet {
    pub const ANY: SpinSet = SpinSet {
        lo: Spin::AntiIdentity,
        hi: Spin::Identity,
    };
    /// Permutations only, as in a Haar bulk or a magic-injection boundary.
    pub const PERMUTATION: SpinSet = SpinSet {
        lo: Spin::MultiSwap,
        hi: Spin::Identity,
    };

    pub fn only(s: Spin) -> Self {
        SpinSet { lo: s, hi: s }
    }

    pub fn interval(lo: Spin, hi: Spin) -> Result<Self> {
        if lo > hi {
            return Err(Error::Validation(format!("empty spin interval {lo:?}..{hi:?}")));
        }
        Ok(SpinSet { lo, hi })
    }

    pub fn contains(self, s: Spin) -> bool {
        self.lo <= s && s <= self.hi
    }

    pub fn spins(self) -> impl Iterator<Item = Spin> {
        Spin::ALL.into_iter().filter(move |&s| self.contains(s))
    }

    /// Constraint for the wall between `{Ī}` and `{X, I}`.
    fn first_wall(self) -> Side {
        match (self.lo, self.hi) {
            (_, Spin::AntiIdentity) => Side::Source,
            (Spin::AntiIdentity, _) => Side::Free,
            _ => Side::Sink,
        }
    }

    /// Constraint for the wall between `{Ī, X}` and `{I}`.
    fn second_wall(self) -> Side {
        match (self.lo, self.hi) {
            (Spin::Identity, _) => Side::Sink,
            (_, Spin::Identity) => Side::Free,
            _ => Side::Source,
        }
    }
}

/// Optimal three-spin configuration. Every optimal assignment decomposes
/// into two nested walls, so the cost `(n-1)·l1 + n·l2` is minimized for
/// all `n ≥ 1` at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeLabelCut {
    /// Length of the wall between `Ī` and `{X, I}`.
    pub l1: usize,
    /// Length of the wall between `{Ī, X}` and `I`.
    pub l2: usize,
    pub labels: Vec<Spin>,
    pub legs1: Vec<usize>,
    pub legs2: Vec<usize>,
}

impl ThreeLabelCut {
    /// Total replica distance across all legs for `2n` copies.
    pub fn cost(&self, n: usize) -> usize {
        (n - 1) * self.l1 + n * self.l2
    }
}

pub fn three_label_cut(graph: &BrickworkGraph, allowed: &[SpinSet]) -> Result<ThreeLabelCut> {
    let first: Vec<Side> = allowed.iter().map(|s| s.first_wall()).collect();
    let second: Vec<Side> = allowed.iter().map(|s| s.second_wall()).collect();
    let c1 = min_cut(graph, &first)?;
    let c2 = min_cut(graph, &second)?;
    // Both cuts stay optimal after uncrossing, and then nest.
    let s1: Vec<bool> = c1.source_side.iter().zip(&c2.source_side).map(|(a, b)| *a && *b).collect();
    let s2: Vec<bool> = c1.source_side.iter().zip(&c2.source_side).map(|(a, b)| *a || *b).collect();
    let crossing = |side: &[bool]| -> Vec<usize> {
        graph
            .legs
            .iter()
            .enumerate()
            .filter(|(_, l)| side[l.ends.0] != side[l.ends.1])
            .map(|(i, _)| i)
            .collect()
    };
    let legs1 = crossing(&s1);
    let legs2 = crossing(&s2);
    if legs1.len() != c1.value || legs2.len() != c2.value {
        return Err(Error::Numerical("uncrossed walls lost optimality".into()));
    }
    let labels = s1
        .iter()
        .zip(&s2)
        .map(|(&a, &b)| match (a, b) {
            (true, _) => Spin::AntiIdentity,
            (false, true) => Spin::MultiSwap,
            (false, false) => Spin::Identity,
        })
        .collect();
    Ok(ThreeLabelCut {
        l1: c1.value,
        l2: c2.value,
        labels,
        legs1,
        legs2,
    })
}
