// SPDX-License-Identifier: Apache-2.0

//! The ten topological measurements taken from each (pruned) network.
//!
//! Every measure works on the unweighted simple graph underneath a
//! [`WeightedGraph`]: weights only matter for pruning. Self-loops are ignored.
//!
//! Conventions for degenerate inputs keep the vector finite and fixed-width:
//! an empty graph measures all zeros, assortativity with no degree variance
//! is 0, and transitivity and betweenness with empty denominators are 0.

use std::collections::VecDeque;
use std::fmt;

use crate::network::WeightedGraph;

/// Number of measurements per level.
pub const MEASURE_COUNT: usize = 10;

/// Canonical measurement names, in vector order.
pub const MEASURE_NAMES: [&str; MEASURE_COUNT] =
    ["ASS", "DEG", "MAX", "MIN", "BET", "CC", "ASPL", "SD", "MT3", "MT4"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasurementVector {
    /// Degree assortativity.
    pub ass: f64,
    /// Average degree.
    pub deg: f64,
    pub max: f64,
    pub min: f64,
    /// Mean normalized betweenness centrality.
    pub bet: f64,
    /// Global clustering coefficient (transitivity).
    pub cc: f64,
    /// Sum of within-component distances over `N - 1`.
    pub aspl: f64,
    /// Population standard deviation of the degrees.
    pub sd: f64,
    /// Connected induced 3-node subgraphs.
    pub mt3: f64,
    /// Connected induced 4-node subgraphs.
    pub mt4: f64,
}

impl MeasurementVector {
    pub const ZERO: MeasurementVector = MeasurementVector {
        ass: 0.0,
        deg: 0.0,
        max: 0.0,
        min: 0.0,
        bet: 0.0,
        cc: 0.0,
        aspl: 0.0,
        sd: 0.0,
        mt3: 0.0,
        mt4: 0.0,
    };

    pub fn to_array(&self) -> [f64; MEASURE_COUNT] {
        [
            self.ass, self.deg, self.max, self.min, self.bet, self.cc, self.aspl, self.sd, self.mt3,
            self.mt4,
        ]
    }

    pub fn from_array(a: [f64; MEASURE_COUNT]) -> Self {
        let [ass, deg, max, min, bet, cc, aspl, sd, mt3, mt4] = a;
        MeasurementVector {
            ass,
            deg,
            max,
            min,
            bet,
            cc,
            aspl,
            sd,
            mt3,
            mt4,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|&v| v == 0.0)
    }
}

impl fmt::Display for MeasurementVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, v)) in MEASURE_NAMES.iter().zip(self.to_array()).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{name}={v}")?;
        }
        Ok(())
    }
}

/// Index-based simple graph with sorted adjacency lists.
#[derive(Debug, Clone)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl SimpleGraph {
    /// Builds from `n` nodes and an edge list; loops and duplicates are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        SimpleGraph {
            adj,
            edge_count: edge_count / 2,
        }
    }

    pub fn from_weighted<N: Ord + Clone>(g: &WeightedGraph<N>) -> Self {
        let nodes: Vec<&N> = g.nodes().collect();
        let index = |n: &N| nodes.binary_search(&n).expect("edge endpoint is a node");
        Self::from_edges(nodes.len(), g.edges().map(|(u, v, _)| (index(u), index(v))))
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Unweighted distances from `source`; `None` for unreachable nodes.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap() + 1;
            for &w in &self.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub sd: f64,
}

pub fn degree_stats(g: &SimpleGraph) -> DegreeStats {
    let n = g.node_count();
    if n == 0 {
        return DegreeStats {
            mean: 0.0,
            max: 0.0,
            min: 0.0,
            sd: 0.0,
        };
    }
    let degrees: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let mean = degrees.iter().sum::<f64>() / n as f64;
    let var = degrees.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
    DegreeStats {
        mean,
        max: degrees.iter().copied().fold(f64::MIN, f64::max),
        min: degrees.iter().copied().fold(f64::MAX, f64::min),
        sd: var.sqrt(),
    }
}

/// Sum of shortest-path lengths over ordered pairs of distinct nodes in the
/// same component, divided by `N - 1`. Note the normalization: this is not
/// the mean over pairs.
pub fn aspl(g: &SimpleGraph) -> f64 {
    let n = g.node_count();
    if n <= 1 {
        return 0.0;
    }
    let total: usize = (0..n)
        .map(|s| g.bfs(s).into_iter().flatten().sum::<usize>())
        .sum();
    total as f64 / (n - 1) as f64
}

/// Per-node betweenness (Brandes), endpoints excluded, normalized by the
/// number of node pairs not involving the node, `(N-1)(N-2)/2`.
pub fn betweenness(g: &SimpleGraph) -> Vec<f64> {
    let n = g.node_count();
    let mut centrality = vec![0.0; n];
    if n < 3 {
        return centrality;
    }

    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        stack.clear();
        preds.iter_mut().for_each(Vec::clear);
        sigma.fill(0.0);
        dist.fill(-1);
        delta.fill(0.0);

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }

    // each unordered pair was visited from both ends
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    centrality.iter_mut().for_each(|c| *c *= scale);
    centrality
}

pub fn betweenness_avg(g: &SimpleGraph) -> f64 {
    let n = g.node_count();
    if n < 3 {
        return 0.0;
    }
    betweenness(g).iter().sum::<f64>() / n as f64
}

/// Triangles, each counted once.
pub fn triangle_count(g: &SimpleGraph) -> u64 {
    let mut count = 0;
    for u in 0..g.node_count() {
        for &v in g.neighbors(u).iter().filter(|&&v| v > u) {
            count += sorted_intersection_above(g.neighbors(u), g.neighbors(v), v);
        }
    }
    count
}

// |{w in a ∩ b : w > floor}| for sorted a, b
fn sorted_intersection_above(a: &[usize], b: &[usize], floor: usize) -> u64 {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i] > floor {
                    c += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Paths of length two, i.e. `Σ C(k_i, 2)`.
pub fn connected_triples(g: &SimpleGraph) -> u64 {
    (0..g.node_count())
        .map(|v| {
            let k = g.degree(v) as u64;
            k * k.saturating_sub(1) / 2
        })
        .sum()
}

/// Transitivity: `3 · triangles / connected triples`.
pub fn clustering_global(g: &SimpleGraph) -> f64 {
    let triples = connected_triples(g);
    if triples == 0 {
        return 0.0;
    }
    3.0 * triangle_count(g) as f64 / triples as f64
}

/// Pearson correlation of the degrees at either end of each edge, with every
/// edge counted in both orientations.
///
/// The sums are kept in integers, so a zero variance is detected exactly.
pub fn assortativity_degree(g: &SimpleGraph) -> f64 {
    if g.edge_count() < 2 {
        return 0.0;
    }
    let (mut sum, mut sum_sq, mut sum_prod) = (0i128, 0i128, 0i128);
    for u in 0..g.node_count() {
        let du = g.degree(u) as i128;
        for &v in g.neighbors(u).iter().filter(|&&v| v > u) {
            let dv = g.degree(v) as i128;
            sum += du + dv;
            sum_sq += du * du + dv * dv;
            sum_prod += 2 * du * dv;
        }
    }
    let m2 = 2 * g.edge_count() as i128;
    let num = m2 * sum_prod - sum * sum;
    let den = m2 * sum_sq - sum * sum;
    if den == 0 {
        return 0.0;
    }
    num as f64 / den as f64
}

/// Number of `size`-node subsets whose induced subgraph is connected, found
/// by ESU enumeration (each subset is reached exactly once from its
/// smallest node).
pub fn connected_subgraph_count(g: &SimpleGraph, size: usize) -> u64 {
    if size == 0 {
        return 0;
    }
    let n = g.node_count();
    let mut esu = Esu {
        g,
        size,
        count: 0,
        sub: Vec::with_capacity(size),
        // number of subgraph members that are adjacent to or equal to a node
        covered: vec![0u32; n],
    };
    for root in 0..n {
        let ext: Vec<usize> = g.neighbors(root).iter().copied().filter(|&u| u > root).collect();
        esu.push(root);
        esu.extend(root, ext);
        esu.pop(root);
    }
    esu.count
}

struct Esu<'a> {
    g: &'a SimpleGraph,
    size: usize,
    count: u64,
    sub: Vec<usize>,
    covered: Vec<u32>,
}

impl Esu<'_> {
    fn push(&mut self, v: usize) {
        self.sub.push(v);
        self.covered[v] += 1;
        for &u in self.g.neighbors(v) {
            self.covered[u] += 1;
        }
    }

    fn pop(&mut self, v: usize) {
        self.sub.pop();
        self.covered[v] -= 1;
        for &u in self.g.neighbors(v) {
            self.covered[u] -= 1;
        }
    }

    fn extend(&mut self, root: usize, mut ext: Vec<usize>) {
        if self.sub.len() == self.size {
            self.count += 1;
            return;
        }
        while let Some(w) = ext.pop() {
            if self.sub.len() + 1 == self.size {
                // the leaf level needs no extension set
                self.count += 1;
                continue;
            }
            // exclusive neighbours of w: not in, nor adjacent to, the current subgraph
            let mut next = ext.clone();
            next.extend(
                self.g
                    .neighbors(w)
                    .iter()
                    .copied()
                    .filter(|&u| u > root && self.covered[u] == 0),
            );
            self.push(w);
            self.extend(root, next);
            self.pop(w);
        }
    }
}

/// `(MT3, MT4)`.
pub fn motif_counts(g: &SimpleGraph) -> (u64, u64) {
    (connected_subgraph_count(g, 3), connected_subgraph_count(g, 4))
}

pub fn measure_simple(g: &SimpleGraph) -> MeasurementVector {
    if g.node_count() == 0 {
        return MeasurementVector::ZERO;
    }
    let degrees = degree_stats(g);
    let (mt3, mt4) = motif_counts(g);
    MeasurementVector {
        ass: assortativity_degree(g),
        deg: degrees.mean,
        max: degrees.max,
        min: degrees.min,
        bet: betweenness_avg(g),
        cc: clustering_global(g),
        aspl: aspl(g),
        sd: degrees.sd,
        mt3: mt3 as f64,
        mt4: mt4 as f64,
    }
}

/// All ten measurements of a network, in canonical order.
pub fn measure_all<N: Ord + Clone>(g: &WeightedGraph<N>) -> MeasurementVector {
    measure_simple(&SimpleGraph::from_weighted(g))
}
