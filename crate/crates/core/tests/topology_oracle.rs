// SPDX-License-Identifier: Apache-2.0

mod support;

use notenet_core::network::WeightedGraph;
use notenet_core::topology::{measure_all, SimpleGraph, MEASURE_NAMES};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use support::oracle;

fn graph(edges: &[(u8, u8, u32)]) -> WeightedGraph<u8> {
    edges.iter().copied().collect()
}

fn unweighted(edges: &[(u8, u8, u32)]) -> Vec<(u8, u8)> {
    edges.iter().map(|&(u, v, _)| (u, v)).collect()
}

#[test]
fn matches_brute_force_on_random_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut disconnected = 0;
    for case in 0..600 {
        let edges = oracle::random_edges(&mut rng, 6);
        let got = measure_all(&graph(&edges)).to_array();
        let want = oracle::measures(&unweighted(&edges));
        for k in 0..10 {
            assert!(
                (got[k] - want[k]).abs() <= 1e-9,
                "case {case} {}: got {} want {} for {edges:?}",
                MEASURE_NAMES[k],
                got[k],
                want[k]
            );
        }
        let simple = SimpleGraph::from_weighted(&graph(&edges));
        if simple.node_count() > 0 && simple.bfs(0).iter().any(Option::is_none) {
            disconnected += 1;
        }
    }
    assert!(disconnected > 20, "ensemble should include disconnected graphs, got {disconnected}");
}

#[test]
fn relabelling_nodes_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let edges = oracle::random_edges(&mut rng, 7);
        let mut perm: Vec<u8> = (0..7).collect();
        perm.shuffle(&mut rng);
        let relabelled: Vec<(u8, u8, u32)> =
            edges.iter().map(|&(u, v, w)| (perm[u as usize], perm[v as usize], w)).collect();
        let a = measure_all(&graph(&edges)).to_array();
        let b = measure_all(&graph(&relabelled)).to_array();
        for k in 0..10 {
            assert!((a[k] - b[k]).abs() <= 1e-12, "{}: {} vs {}", MEASURE_NAMES[k], a[k], b[k]);
        }
    }
}

#[test]
fn weights_do_not_affect_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for factor in 1..6 {
        let edges = oracle::random_edges(&mut rng, 6);
        let g = graph(&edges);
        assert_eq!(measure_all(&g), measure_all(&g.map_weights(|w| w * factor)));
    }
}

#[test]
fn measures_stay_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let choose = |n: f64, k: f64| -> f64 { (0..k as u32).fold(1.0, |acc, i| acc * (n - i as f64) / (i as f64 + 1.0)) };
    for _ in 0..300 {
        let g = graph(&oracle::random_edges(&mut rng, 8));
        let v = measure_all(&g);
        let n = g.node_count() as f64;
        assert!(v.to_array().iter().all(|x| x.is_finite()));
        assert!((0.0..=1.0).contains(&v.cc));
        assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v.ass));
        assert!((0.0..=1.0 + 1e-12).contains(&v.bet));
        assert!(v.max >= v.deg && v.deg >= v.min && v.min >= 0.0);
        assert!(v.mt3 <= choose(n, 3.0) && v.mt4 <= choose(n, 4.0));
        assert_eq!(v.mt3.fract(), 0.0);
        assert_eq!(v.mt4.fract(), 0.0);
    }
}
