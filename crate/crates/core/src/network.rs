// SPDX-License-Identifier: Apache-2.0

//! Sliding-window mapping of note sequences into undirected weighted networks,
//! and weight-threshold pruning.
//!
//! The sequence is rendered as a string of two-character tokens. A window of
//! `ws` characters at offset `k` is the current word and the window at
//! `k + st` is the next word; every step adds one to the weight of the edge
//! between them. With `ws = st = 2` this links each note to its successor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::notes::{NoteSequence, NoteSymbol, TOKEN_WIDTH};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("invalid traversal parameters: {0}")]
    Config(String),
    #[error("line {line}: {reason}")]
    EdgeList { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NetworkError {
    fn from(e: std::io::Error) -> Self {
        NetworkError::Io(e.to_string())
    }
}

/// What to do when two adjacent words are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfEdgePolicy {
    #[default]
    Skip,
    /// Record a self-loop. Topology measures ignore loops; they only keep
    /// the node present until pruning removes the loop.
    Allow,
}

/// Word size and step size, both measured in characters of the rendered
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraversalParams {
    ws: usize,
    st: usize,
    self_edges: SelfEdgePolicy,
}

impl Default for TraversalParams {
    fn default() -> Self {
        TraversalParams {
            ws: 2,
            st: 2,
            self_edges: SelfEdgePolicy::Skip,
        }
    }
}

impl TraversalParams {
    /// Strict parameters: both sizes must be multiples of the note token width.
    pub fn new(ws: usize, st: usize) -> Result<Self, NetworkError> {
        let p = Self::relaxed(ws, st)?;
        if ws % TOKEN_WIDTH != 0 || st % TOKEN_WIDTH != 0 {
            return Err(NetworkError::Config(format!(
                "ws={ws} and st={st} must be multiples of the note width {TOKEN_WIDTH}"
            )));
        }
        Ok(p)
    }

    /// Only requires `ws, st >= 1`; windows may then straddle note boundaries.
    pub fn relaxed(ws: usize, st: usize) -> Result<Self, NetworkError> {
        if ws == 0 || st == 0 {
            return Err(NetworkError::Config(format!(
                "ws and st must be at least 1 (got ws={ws}, st={st})"
            )));
        }
        Ok(TraversalParams {
            ws,
            st,
            self_edges: SelfEdgePolicy::Skip,
        })
    }

    pub fn with_self_edges(mut self, policy: SelfEdgePolicy) -> Self {
        self.self_edges = policy;
        self
    }

    pub fn ws(&self) -> usize {
        self.ws
    }

    pub fn st(&self) -> usize {
        self.st
    }

    pub fn self_edges(&self) -> SelfEdgePolicy {
        self.self_edges
    }
}

/// A node of a sequence network: one window of the rendered note string.
/// With the default parameters a word is exactly one note name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(String);

impl Word {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<NoteSymbol> for Word {
    fn from(n: NoteSymbol) -> Self {
        Word(n.to_string())
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Self {
        Word(s.to_string())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Word {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Word(s.to_string()))
    }
}

/// Undirected graph with positive integer edge weights. Each edge is stored
/// once under its ordered endpoint pair, and the node set is exactly the set
/// of edge endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph<N: Ord = Word> {
    edges: BTreeMap<(N, N), u32>,
    nodes: BTreeSet<N>,
}

impl<N: Ord> Default for WeightedGraph<N> {
    fn default() -> Self {
        WeightedGraph {
            edges: BTreeMap::new(),
            nodes: BTreeSet::new(),
        }
    }
}

impl<N: Ord + Clone> WeightedGraph<N> {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(u: N, v: N) -> (N, N) {
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Adds `w` to the weight of edge `u–v`, creating it if needed.
    /// Adding zero is a no-op.
    pub fn add_weight(&mut self, u: N, v: N, w: u32) {
        if w == 0 {
            return;
        }
        self.nodes.insert(u.clone());
        self.nodes.insert(v.clone());
        *self.edges.entry(Self::key(u, v)).or_insert(0) += w;
    }

    pub fn increment(&mut self, u: N, v: N) {
        self.add_weight(u, v, 1);
    }

    /// Weight of `u–v`, or 0 when absent. Symmetric in its arguments.
    pub fn weight(&self, u: &N, v: &N) -> u32 {
        let key = Self::key(u.clone(), v.clone());
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &N> {
        self.nodes.iter()
    }

    /// Edges as `(u, v, weight)` with `u <= v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (&N, &N, u32)> {
        self.edges.iter().map(|((u, v), &w)| (u, v, w))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(|&w| w as u64).sum()
    }

    pub fn max_weight(&self) -> u32 {
        self.edges.values().copied().max().unwrap_or(0)
    }

    /// Applies `f` to every weight; edges mapped to 0 are removed.
    pub fn map_weights(&self, f: impl Fn(u32) -> u32) -> Self {
        let mut g = Self::new();
        for (u, v, w) in self.edges() {
            g.add_weight(u.clone(), v.clone(), f(w));
        }
        g
    }

    /// Keeps exactly the edges with weight `> t`; nodes left without an edge
    /// disappear.
    pub fn prune(&self, t: u32) -> Self {
        let mut g = Self::new();
        for (u, v, w) in self.edges().filter(|&(_, _, w)| w > t) {
            g.add_weight(u.clone(), v.clone(), w);
        }
        g
    }
}

impl<N: Ord + Clone> FromIterator<(N, N, u32)> for WeightedGraph<N> {
    fn from_iter<I: IntoIterator<Item = (N, N, u32)>>(iter: I) -> Self {
        let mut g = WeightedGraph::new();
        for (u, v, w) in iter {
            g.add_weight(u, v, w);
        }
        g
    }
}

pub fn prune_by_weight<N: Ord + Clone>(g: &WeightedGraph<N>, t: u32) -> WeightedGraph<N> {
    g.prune(t)
}

/// Maps a note sequence to its network.
pub fn build_network(seq: &NoteSequence, params: &TraversalParams) -> WeightedGraph<Word> {
    build_network_from_str(&seq.render(), params)
}

/// Same as [`build_network`] over an already-rendered symbol string.
pub fn build_network_from_str(rendered: &str, params: &TraversalParams) -> WeightedGraph<Word> {
    let (ws, st) = (params.ws, params.st);
    let bytes = rendered.as_bytes();
    debug_assert!(rendered.is_ascii());
    let mut g = WeightedGraph::new();
    let mut k = 0;
    while k + st + ws <= bytes.len() {
        let cur = &rendered[k..k + ws];
        let next = &rendered[k + st..k + st + ws];
        if cur != next || params.self_edges == SelfEdgePolicy::Allow {
            g.increment(Word::from(cur), Word::from(next));
        }
        k += st;
    }
    g
}

/// Writes one `u v weight` line per edge, sorted.
pub fn write_edge_list<N, W>(g: &WeightedGraph<N>, sink: &mut W) -> Result<(), NetworkError>
where
    N: Ord + Clone + fmt::Display,
    W: Write,
{
    let mut lines: Vec<String> = g.edges().map(|(u, v, w)| format!("{u} {v} {w}")).collect();
    lines.sort();
    for l in lines {
        writeln!(sink, "{l}")?;
    }
    Ok(())
}

pub fn read_edge_list<N, R>(source: R) -> Result<WeightedGraph<N>, NetworkError>
where
    N: Ord + Clone + FromStr,
    R: BufRead,
{
    let mut g = WeightedGraph::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: &str| NetworkError::EdgeList {
            line: i + 1,
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [u, v, w] = parts[..] else {
            return Err(err("expected `u v weight`"));
        };
        let u = u.parse().map_err(|_| err("bad node name"))?;
        let v = v.parse().map_err(|_| err("bad node name"))?;
        let w: u32 = w.parse().map_err(|_| err("weight must be a positive integer"))?;
        if w == 0 {
            return Err(err("weight must be a positive integer"));
        }
        g.add_weight(u, v, w);
    }
    Ok(g)
}
