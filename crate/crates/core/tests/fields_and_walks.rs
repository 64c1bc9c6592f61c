use std::collections::BTreeSet;

use giantwalk_core::giant::{sample_giant, ModelParams};
use giantwalk_core::gff::{estimate_m, union_bound_max, GffSampler};
use giantwalk_core::resistance::ResistanceOracle;
use giantwalk_core::seed::rng_from_seed;
use giantwalk_core::skeleton::{build_hierarchy, validate_hierarchy, verify_budgets_for};
use giantwalk_core::walk::{exact_cover_small, simulate_cover};
use giantwalk_core::{Graph, Role};
use rand::seq::SliceRandom;
use rand::Rng;

fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut edges = BTreeSet::new();
    for v in 1..n {
        edges.insert((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::with_uniform_role(n, &edges, Role::Kernel).unwrap()
}

fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    let edges: Vec<_> = g
        .edges()
        .map(|(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
        .collect();
    Graph::with_uniform_role(g.vertex_count(), &edges, Role::Kernel).unwrap()
}

#[test]
fn field_covariance_matches_green_function() {
    // ~65 entries share draws, so each is held to 3 SE in aggregate and 5 SE
    // individually
    let draws = 20_000;
    let (mut entries, mut over3) = (0, 0);
    for gi in 0..10u64 {
        let g = random_connected(5 + gi as usize, 4, 100 + gi);
        let n = g.vertex_count();
        let sampler = GffSampler::<f64>::new(&g, 0).unwrap();
        let oracle = ResistanceOracle::<f64>::new(&g, 0).unwrap();
        let r = |v, w| oracle.resistance(v, w).value;
        let mut rng = rng_from_seed(gi);
        let samples: Vec<Vec<f64>> = (0..draws).map(|_| sampler.draw(&mut rng)).collect();
        // pair (v, w) with v ≥ 1 against its successor
        for v in 1..n {
            let w = 1 + v % (n - 1);
            let want = 0.5 * (r(v, 0) + r(w, 0) - r(v, w));
            let prods: Vec<f64> = samples.iter().map(|s| s[v] * s[w]).collect();
            let k = draws as f64;
            let mean = prods.iter().sum::<f64>() / k;
            let sd = (prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
            let z = (mean - want).abs() / (sd / k.sqrt());
            assert!(z <= 5.0, "graph {gi} ({v},{w}): {mean} vs {want}");
            entries += 1;
            over3 += usize::from(z > 3.0);
        }
        assert!(samples.iter().all(|s| s[0] == 0.0));
    }
    assert!(over3 * 20 <= entries, "{over3} of {entries} entries beyond 3 SE");
}

#[test]
fn maximum_concentrates_and_respects_union_bound() {
    let g = random_connected(60, 20, 7);
    let est = estimate_m(&g, 0, 2000, 3).unwrap();
    let sigma = est.sigma2.sqrt();
    for t in [sigma, 2.0 * sigma] {
        let k = est.maxima.len() as f64;
        let tail = est.maxima.iter().filter(|m| (*m - est.mean).abs() > t).count() as f64 / k;
        let bound = 2.0 * (-t * t / (2.0 * est.sigma2)).exp();
        assert!(tail <= bound + 3.0 * (bound * (1.0 - bound).max(0.0) / k).sqrt(), "t={t}: {tail} vs {bound}");
    }
    let ub = union_bound_max(est.sigma2_bound.sqrt(), g.vertex_count() as u64);
    assert!(est.mean <= ub + 3.0 * est.se);
}

#[test]
fn expected_maximum_is_label_invariant() {
    let g = random_connected(40, 15, 11);
    let mut perm: Vec<usize> = (0..40).collect();
    perm.shuffle(&mut rng_from_seed(5));
    let h = relabel(&g, &perm);
    let a = estimate_m(&g, 3, 2000, 1).unwrap();
    let b = estimate_m(&h, perm[3], 2000, 2).unwrap();
    assert!((a.mean - b.mean).abs() <= 3.0 * (a.se * a.se + b.se * b.se).sqrt());
    assert!((a.sigma2_bound - b.sigma2_bound).abs() < 1e-12);
}

#[test]
fn changing_the_pin_moves_the_maximum_by_at_most_a_diameter_term() {
    // η − η_v is the field pinned at v, so the two expected maxima differ by
    // at most E|η_49| = √(2 R(0, 49) / π).
    let g = random_connected(50, 10, 23);
    let a = estimate_m(&g, 0, 2000, 4).unwrap();
    let b = estimate_m(&g, 49, 2000, 5).unwrap();
    let r = ResistanceOracle::<f64>::new(&g, 0).unwrap().resistance(0, 49).value;
    let slack = (2.0 * r / std::f64::consts::PI).sqrt();
    assert!((a.mean - b.mean).abs() <= slack + 3.0 * (a.se * a.se + b.se * b.se).sqrt());
}

#[test]
fn simulated_cover_agrees_with_exact() {
    for gi in 0..6u64 {
        let g = random_connected(4 + gi as usize, 3, 40 + gi);
        let exact: f64 = exact_cover_small(&g, 0).unwrap();
        let mc = simulate_cover(&g, 0, 4000, gi, None).unwrap();
        assert!((mc.mean - exact).abs() <= 3.0 * mc.se, "graph {gi}: {} vs {exact}", mc.mean);
        assert!(mc.steps.iter().all(|&s| s as usize + 1 >= g.vertex_count()));
    }
}

#[test]
fn skeleton_level_sizes_halve_geometrically() {
    let params = ModelParams::new(1_000_000, 0.1).unwrap();
    for seed in 0..2 {
        let gs = sample_giant(&params, seed).unwrap();
        let h = build_hierarchy(&gs).unwrap();
        assert!(validate_hierarchy(&gs, &h).unwrap().ok());
        let b = verify_budgets_for(&h, &params).unwrap();
        assert_eq!(b.budget_violations, 0);
        assert_eq!(b.link_violations, 0);
        let fit = b.j_fit.unwrap();
        let lo = fit.target * 1.2;
        let hi = fit.target * 0.8;
        assert!((lo..=hi).contains(&fit.slope), "seed {seed}: slope {}", fit.slope);
    }
}

#[test]
fn single_precision_aliases_agree_with_double() {
    use giantwalk_core::{GffSampler32, ResistanceOracle32, ResistanceOracle64};
    let g = random_connected(30, 12, 2);
    let lo = ResistanceOracle32::new(&g, 0).unwrap();
    let hi = ResistanceOracle64::new(&g, 0).unwrap();
    for w in 1..30 {
        let (a, b) = (lo.resistance(3, w).value as f64, hi.resistance(3, w).value);
        assert!((a - b).abs() <= 1e-4 * b.max(1.0), "{a} vs {b}");
    }
    let s = GffSampler32::new(&g, 0).unwrap();
    assert!((s.variance(7) as f64 - hi.resistance(0, 7).value).abs() < 1e-4);
    assert_eq!(s.draw(&mut rng_from_seed(1))[0], 0.0);
}
