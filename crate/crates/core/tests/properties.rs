use std::collections::BTreeSet;

use giantwalk_core::giant::{
    sample_configuration, sample_degrees, sample_giant, subdivide, ModelParams,
};
use giantwalk_core::gw::{sample_pgw_tree, survival_prob_exact};
use giantwalk_core::linalg::solve_exact;
use giantwalk_core::resistance::{commute_identity_check, effective_resistance, ResistanceOracle};
use giantwalk_core::seed::rng_from_seed;
use giantwalk_core::walk::cover_steps;
use giantwalk_core::{Graph, Role};
use proptest::prelude::*;
use rand::Rng;

fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::with_uniform_role(n, &edges, Role::Kernel).unwrap()
}

/// `R(v,w)` from the pseudoinverse `L⁺ = (L + J/n)⁻¹ − J/n`, column by column.
fn pinv_resistance(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut a = vec![vec![1.0 / n as f64; n]; n];
    for v in 0..n {
        a[v][v] += g.degree(v) as f64;
        for &w in g.neighbors(v) {
            a[v][w] -= 1.0;
        }
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            solve_exact(a.clone(), e).unwrap()
        })
        .collect();
    (0..n).map(|v| (0..n).map(|w| cols[v][v] + cols[w][w] - 2.0 * cols[v][w]).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bfs_multi_source_is_min_of_single(n in 2usize..40, extra in 0usize..30, seed: u64, k in 1usize..4) {
        let g = random_connected(n, extra, seed);
        let sources: Vec<usize> = (0..k).map(|i| (i * 7 + seed as usize) % n).collect();
        let multi = g.bfs_distances(&sources).unwrap();
        let singles: Vec<_> = sources.iter().map(|&s| g.bfs_distances(&[s]).unwrap()).collect();
        for v in 0..n {
            let want = singles.iter().map(|d| d.get(v).unwrap()).min().unwrap();
            prop_assert_eq!(multi.get(v), Some(want));
            prop_assert_eq!(multi.get(v) == Some(0), sources.contains(&v));
            for &w in g.neighbors(v) {
                prop_assert!(multi.get(v).unwrap().abs_diff(multi.get(w).unwrap()) <= 1);
            }
        }
        let again = g.bfs_distances(&sources).unwrap();
        prop_assert_eq!(again.as_slice(), multi.as_slice());
        prop_assert!(g.diameter_exact().unwrap() >= multi.max_finite());
        let text = g.to_text();
        prop_assert_eq!(Graph::read_text(text.as_bytes()).unwrap().to_text(), text);
    }

    #[test]
    fn resistance_is_a_metric_below_distance(n in 2usize..14, extra in 0usize..20, seed: u64) {
        let g = random_connected(n, extra, seed);
        let want = pinv_resistance(&g);
        let oracle = ResistanceOracle::<f64>::new(&g, 0).unwrap();
        let r: Vec<Vec<f64>> = (0..n).map(|v| (0..n).map(|w| oracle.resistance(v, w).value).collect()).collect();
        for v in 0..n {
            let d = g.bfs_distances(&[v]).unwrap();
            prop_assert_eq!(r[v][v], 0.0);
            for w in 0..n {
                prop_assert!((r[v][w] - want[v][w]).abs() < 1e-9);
                prop_assert!((r[v][w] - r[w][v]).abs() < 1e-10);
                prop_assert!(r[v][w] <= d.get(w).unwrap() as f64 + 1e-10);
                for u in 0..n {
                    prop_assert!(r[v][w] <= r[v][u] + r[u][w] + 1e-10);
                }
            }
        }
    }

    #[test]
    fn deleting_an_edge_never_lowers_resistance(n in 3usize..20, extra in 1usize..25, seed: u64) {
        let g = random_connected(n, extra, seed);
        let edges: Vec<_> = g.edges().collect();
        let pick = (seed as usize) % edges.len();
        let rest: Vec<_> = edges.iter().enumerate().filter(|&(i, _)| i != pick).map(|(_, &e)| e).collect();
        let h = Graph::with_uniform_role(n, &rest, Role::Kernel).unwrap();
        prop_assume!(h.is_connected());
        let before = ResistanceOracle::<f64>::new(&g, 0).unwrap();
        let after = ResistanceOracle::<f64>::new(&h, 0).unwrap();
        for v in 0..n {
            for w in v + 1..n {
                prop_assert!(after.resistance(v, w).value >= before.resistance(v, w).value - 1e-10);
            }
        }
    }

    #[test]
    fn direct_and_dense_solvers_agree(n in 2usize..60, extra in 0usize..60, seed: u64) {
        let g = random_connected(n, extra, seed);
        let oracle = ResistanceOracle::<f64>::new(&g, n - 1).unwrap();
        let (v, w) = ((seed as usize) % n, (seed as usize / 7) % n);
        let a = effective_resistance::<f64>(&g, v, w, 1e-10).unwrap().value;
        let b = oracle.resistance(v, w).value;
        prop_assert!((a - b).abs() <= 1e-7 * a.max(1e-12));
    }

    #[test]
    fn commute_identity_holds(n in 2usize..30, extra in 0usize..30, seed: u64) {
        let g = random_connected(n, extra, seed);
        let (v, w) = ((seed as usize) % n, (seed as usize / 13) % n);
        prop_assume!(v != w);
        let c = commute_identity_check(&g, v, w).unwrap();
        prop_assert!(c.relative_residual < 1e-6);
    }

    #[test]
    fn every_cover_walk_takes_at_least_n_minus_one_steps(n in 2usize..30, extra in 0usize..30, seed: u64) {
        let g = random_connected(n, extra, seed);
        let mut rng = rng_from_seed(seed);
        let s = cover_steps(&g, (seed as usize) % n, u64::MAX, &mut rng).unwrap();
        prop_assert!(s >= (n - 1) as u64);
    }

    #[test]
    fn survival_curve_fixed_point(mu in 0.0f64..0.999, k_max in 1usize..400) {
        let c = survival_prob_exact(mu, k_max).unwrap();
        prop_assert_eq!(c.p[0], 1.0);
        for k in 1..=k_max {
            prop_assert!(c.p[k] <= c.p[k - 1]);
            prop_assert_eq!(c.p[k], -(-mu * c.p[k - 1]).exp_m1());
        }
    }

    #[test]
    fn pgw_trees_are_forests_of_consistent_depth(mu in 0.0f64..0.99, seed: u64) {
        let t = sample_pgw_tree(mu, 60, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(t.parent[0], None);
        for v in 1..t.size() {
            let p = t.parent[v].unwrap();
            prop_assert!(p < v);
            prop_assert_eq!(t.depth[v], t.depth[p] + 1);
            prop_assert!(t.depth[v] <= 60);
        }
    }

    #[test]
    fn degree_parity_and_kernel_fidelity(seed: u64) {
        let params = ModelParams::new(100_000, 0.1).unwrap();
        let mut rng = rng_from_seed(seed);
        let ds = sample_degrees(&params, &mut rng).unwrap();
        prop_assert_eq!(ds.restricted_sum() % 2, 0);
        let degrees = ds.kernel_degrees();
        let k = sample_configuration(&degrees, Role::Kernel, 100_000, &mut rng).unwrap();
        for (v, &d) in degrees.iter().enumerate() {
            prop_assert_eq!(k.graph.degree(v), d as usize);
        }
        // contracting the paths gives back the kernel edge multiset
        let sub = subdivide(&k.graph, params.mu, params.eps, &mut rng).unwrap();
        let mut ends: Vec<_> = sub.paths.iter().map(|p| p.ends).collect();
        ends.sort_unstable();
        prop_assert_eq!(ends, k.graph.edges().collect::<Vec<_>>());
        for p in &sub.paths {
            prop_assert_eq!(p.internal.len() + 1, p.length);
        }
    }
}

#[test]
fn forest_walks_end_in_k2_within_the_cap() {
    let params = ModelParams::new(300_000, 0.1).unwrap();
    let gs = sample_giant(&params, 17).unwrap();
    for v in 0..gs.graph.vertex_count() {
        let mut w = v;
        let mut steps = 0;
        while let Some(p) = gs.parent[w] {
            w = p;
            steps += 1;
            assert!(steps <= gs.depth_cap);
        }
        assert!(gs.in_k2(w));
        assert_eq!(steps, gs.depth[v]);
        assert_eq!(w, gs.root[v]);
    }
    for role in [Role::Kernel, Role::Path, Role::Tree] {
        let want = match role {
            Role::Kernel => gs.kernel_count,
            Role::Path => gs.k2_count - gs.kernel_count,
            Role::Tree => gs.tree_vertex_count(),
        };
        assert_eq!(gs.graph.role_count(role), want);
    }
}

#[test]
fn path_lengths_follow_the_geometric_law() {
    let params = ModelParams::new(1_000_000, 0.1).unwrap();
    let mut lengths = Vec::new();
    let mut seed = 0;
    while lengths.len() < 10_000 {
        let gs = sample_giant(&params, seed).unwrap();
        lengths.extend(gs.paths.iter().map(|p| p.length as f64));
        seed += 1;
    }
    let k = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / k;
    let var = lengths.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let q = 1.0 - params.mu;
    let (want_mean, want_var) = (1.0 / q, params.mu / (q * q));
    assert!((mean - want_mean).abs() < 3.0 * (var / k).sqrt(), "{mean} vs {want_mean}");
    // fourth central moment for the standard error of the variance
    let m4 = lengths.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / k;
    let se_var = ((m4 - var * var) / k).sqrt();
    assert!((var - want_var).abs() < 3.0 * se_var, "{var} vs {want_var}");
}
