// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference measurements for small graphs.
//!
//! Nothing here shares code with the library: distances come from
//! Floyd-Warshall, motif and triangle counts from exhaustive subset
//! enumeration, betweenness from enumerating every simple path, and
//! assortativity from the textbook Pearson formula.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use rand::Rng;

/// Random simple weighted graph on at most `max_nodes` labelled nodes.
/// Isolated nodes are not represented, matching the library's graphs.
pub fn random_edges<R: Rng>(rng: &mut R, max_nodes: u8) -> Vec<(u8, u8, u32)> {
    let n = rng.random_range(0..=max_nodes);
    let p: f64 = rng.random_range(0.1..0.95);
    // some graphs only allow edges within two blocks, forcing disconnection
    let split = if rng.random_bool(0.4) { rng.random_range(0..=n) } else { 0 };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if (u < split) == (v < split) && rng.random::<f64>() < p {
                edges.push((u, v, rng.random_range(1..=6)));
            }
        }
    }
    edges
}

struct Dense {
    n: usize,
    adj: Vec<Vec<bool>>,
}

fn dense(edges: &[(u8, u8)]) -> Dense {
    let nodes: BTreeSet<u8> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let nodes: Vec<u8> = nodes.into_iter().collect();
    let n = nodes.len();
    let pos = |x: u8| nodes.iter().position(|&y| y == x).unwrap();
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u != v {
            adj[pos(u)][pos(v)] = true;
            adj[pos(v)][pos(u)] = true;
        }
    }
    Dense { n, adj }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

fn induced_connected(g: &Dense, set: &[usize]) -> bool {
    let mut seen = vec![set[0]];
    let mut frontier = vec![set[0]];
    while let Some(v) = frontier.pop() {
        for &w in set {
            if g.adj[v][w] && !seen.contains(&w) {
                seen.push(w);
                frontier.push(w);
            }
        }
    }
    seen.len() == set.len()
}

fn floyd_warshall(g: &Dense) -> Vec<Vec<Option<u32>>> {
    let n = g.n;
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if g.adj[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].map_or(true, |c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

fn all_simple_paths(g: &Dense, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(g: &Dense, path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        for w in 0..g.n {
            if g.adj[v][w] && !path.contains(&w) {
                path.push(w);
                walk(g, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(g, &mut vec![s], t, &mut out);
    out
}

fn betweenness_avg(g: &Dense) -> f64 {
    let n = g.n;
    if n < 3 {
        return 0.0;
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_simple_paths(g, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let geodesics: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for v in (0..n).filter(|&v| v != s && v != t) {
                let through = geodesics.iter().filter(|p| p.contains(&v)).count();
                score[v] += through as f64 / geodesics.len() as f64;
            }
        }
    }
    let pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
    score.iter().map(|s| s / pairs).sum::<f64>() / n as f64
}

fn pearson_assortativity(g: &Dense) -> f64 {
    let deg: Vec<f64> = (0..g.n).map(|i| g.adj[i].iter().filter(|&&b| b).count() as f64).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..g.n {
        for j in 0..g.n {
            if g.adj[i][j] {
                xs.push(deg[i]);
                ys.push(deg[j]);
            }
        }
    }
    if xs.len() < 4 {
        return 0.0;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / m;
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / m;
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / m;
    if vx < 1e-12 || vy < 1e-12 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Reference values in canonical order
/// `[ASS, DEG, MAX, MIN, BET, CC, ASPL, SD, MT3, MT4]`.
pub fn measures(edges: &[(u8, u8)]) -> [f64; 10] {
    let g = dense(edges);
    let n = g.n;
    if n == 0 {
        return [0.0; 10];
    }

    let deg: Vec<f64> = (0..n).map(|i| g.adj[i].iter().filter(|&&b| b).count() as f64).collect();
    let mean = deg.iter().sum::<f64>() / n as f64;
    let max = deg.iter().cloned().fold(0.0, f64::max);
    let min = deg.iter().cloned().fold(f64::INFINITY, f64::min);
    let sd = (deg.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();

    let dist = floyd_warshall(&g);
    let mut total = 0u32;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += dist[i][j].unwrap_or(0);
            }
        }
    }
    let aspl = if n > 1 { total as f64 / (n - 1) as f64 } else { 0.0 };

    let (mut triangles, mut open) = (0u32, 0u32);
    let mut mt3 = 0u32;
    for set in subsets(n, 3) {
        let e = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .filter(|&&(a, b)| g.adj[set[a]][set[b]])
            .count();
        match e {
            3 => triangles += 1,
            2 => open += 1,
            _ => {}
        }
        if induced_connected(&g, &set) {
            mt3 += 1;
        }
    }
    let triples = 3 * triangles + open;
    let cc = if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    };
    let mt4 = subsets(n, 4).iter().filter(|s| induced_connected(&g, s)).count();

    [
        pearson_assortativity(&g),
        mean,
        max,
        min,
        betweenness_avg(&g),
        cc,
        aspl,
        sd,
        mt3 as f64,
        mt4 as f64,
    ]
}
