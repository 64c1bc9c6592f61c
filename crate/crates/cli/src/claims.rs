//! The acceptance battery behind `verify`. Each claim is a function of the
//! master seed and a [`Plan`], and returns one ledger record.

use giantwalk_core::giant::{apoh_report, sample_giant, ModelParams};
use giantwalk_core::gff::{estimate_m, expected_max_iid_normals, GffSampler};
use giantwalk_core::gw::CensusConstants;
use giantwalk_core::resistance::{commute_identity_check, effective_resistance, ResistanceOracle};
use giantwalk_core::seed::{derive_seed, replica_rng, rng_from_seed};
use giantwalk_core::skeleton::{build_hierarchy, dyadic_k2_pairs, validate_hierarchy, verify_budgets_for};
use giantwalk_core::walk::{exact_cover_small, simulate_cover, start_panel};
use giantwalk_core::{Graph, Role};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Scale};
use crate::experiment::GIT_DESCRIBE;
use crate::ledger::{ClaimRecord, ClaimsLedger, Series, Verdict};

/// Sizes for every claim.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub commute_graphs: usize,
    pub commute_pairs: usize,
    pub commute_max_vertices: usize,
    pub resist_params: (u64, f64),
    pub resist_pairs: usize,
    pub gff_samples: usize,
    pub gff_graphs: usize,
    pub m_replicas: usize,
    pub iid_s: usize,
    pub iid_replicas: usize,
    pub cover_graphs: usize,
    pub cover_replicas: usize,
    pub stats_params: (u64, f64),
    pub stats_seeds: usize,
    pub skeleton_params: Vec<(u64, f64)>,
    pub skeleton_seeds: usize,
    pub trend_big_n: Vec<f64>,
    pub trend_eps: f64,
    pub trend_seeds: usize,
    pub trend_m_replicas: usize,
    pub trend_cover_replicas: usize,
    pub trend_starts: usize,
}

impl Plan {
    pub fn for_scale(scale: Scale) -> Self {
        match scale {
            Scale::Acceptance => Plan {
                commute_graphs: 50,
                commute_pairs: 5,
                commute_max_vertices: 50,
                resist_params: (1_000_000, 0.1),
                resist_pairs: 1000,
                gff_samples: 100_000,
                gff_graphs: 10,
                m_replicas: 100_000,
                iid_s: 10_000,
                iid_replicas: 10_000,
                cover_graphs: 30,
                cover_replicas: 10_000,
                stats_params: (1_000_000, 0.1),
                stats_seeds: 20,
                skeleton_params: vec![(1_000_000, 0.1), (125_000, 0.2)],
                skeleton_seeds: 3,
                trend_big_n: vec![250.0, 1000.0, 4000.0],
                trend_eps: 0.1,
                trend_seeds: 3,
                trend_m_replicas: 200,
                trend_cover_replicas: 10,
                trend_starts: 2,
            },
            Scale::Quick => Plan {
                commute_graphs: 10,
                commute_pairs: 3,
                commute_max_vertices: 20,
                resist_params: (100_000, 0.2),
                resist_pairs: 100,
                gff_samples: 20_000,
                gff_graphs: 5,
                m_replicas: 20_000,
                iid_s: 10_000,
                iid_replicas: 2_000,
                cover_graphs: 10,
                cover_replicas: 2_000,
                stats_params: (200_000, 0.1),
                stats_seeds: 3,
                skeleton_params: vec![(200_000, 0.1)],
                skeleton_seeds: 1,
                trend_big_n: vec![50.0, 100.0, 200.0],
                trend_eps: 0.1,
                trend_seeds: 1,
                trend_m_replicas: 100,
                trend_cover_replicas: 10,
                trend_starts: 1,
            },
        }
    }
}

/// Feige bounds are applied from this many vertices on: below it the
/// single edge, `P3` and a four-vertex graph fall outside the band.
pub const FEIGE_MIN_VERTICES: usize = 5;

/// `(|V|, cover time)` pairs gathered by claims 6 and 9 for claim 10.
pub type CoverTimes = Vec<(usize, f64)>;

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::with_uniform_role(n, edges, Role::Kernel).expect("valid literal graph")
}

fn path3() -> Graph {
    graph(3, &[(0, 1), (1, 2)])
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let v = rng.random_range(0..n);
    let w = (v + rng.random_range(1..n)) % n;
    (v, w)
}

pub fn commute_identity(seed: u64, plan: &Plan, literal: bool) -> ClaimRecord {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for gi in 0..plan.commute_graphs {
        let mut rng = replica_rng(seed, "claim-commute", gi as u64);
        let n = rng.random_range(2..=plan.commute_max_vertices);
        let extra = rng.random_range(0..=n);
        let g = Graph::random_connected(n, extra, &mut rng);
        for _ in 0..plan.commute_pairs {
            let (v, w) = random_pair(n, &mut rng);
            let c = commute_identity_check(&g, v, w).expect("small connected graph");
            worst = worst.max(if literal { c.literal_relative_residual } else { c.relative_residual });
            checks += 1;
        }
    }
    let form = if literal { "τ-sum vs |E|R (literal form)" } else { "τ-sum vs 2|E|R" };
    ClaimRecord::new(1, worst, "< 1e-6", worst < 1e-6, format!("max relative residual of {form} over {checks} pairs"))
}

pub fn resistance_oracle(seed: u64, plan: &Plan) -> ClaimRecord {
    let r = |g: &Graph, v, w| effective_resistance::<f64>(g, v, w, 1e-12).expect("connected").value;
    let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    let closed = [
        ("P3", r(&path3(), 0, 2), 2.0),
        ("triangle", r(&graph(3, &[(0, 1), (1, 2), (0, 2)]), 0, 1), 2.0 / 3.0),
        ("K4", r(&k4, 0, 3), 0.5),
    ];
    let closed_ok = closed.iter().all(|(_, got, want)| (got - want).abs() <= 1e-9);
    let (n, eps) = plan.resist_params;
    let params = ModelParams::new(n, eps).expect("valid parameters");
    let gs = sample_giant(&params, derive_seed(seed, "claim-resist", 0, 0)).expect("sampled giant");
    let g = &gs.graph;
    let oracle = ResistanceOracle::<f64>::new(g, 0).expect("connected");
    let mut rng = replica_rng(seed, "claim-resist-pairs", 0);
    let pairs: Vec<(usize, usize)> = (0..plan.resist_pairs).map(|_| random_pair(g.vertex_count(), &mut rng)).collect();
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|&(v, w)| {
            let d = g.bfs_distances(&[v]).expect("valid vertex").get(w).expect("connected");
            oracle.resistance(v, w).value / d as f64
        })
        .collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let violations = ratios.iter().filter(|&&q| q > 1.0 + 1e-9).count();
    let detail = format!(
        "P3={:.12} triangle={:.12} K4={:.12}; {} pairs on |V|={}, {violations} with R > dist",
        closed[0].1,
        closed[1].1,
        closed[2].1,
        pairs.len(),
        g.vertex_count()
    );
    ClaimRecord::new(2, worst, "max R/dist ≤ 1 and closed forms ±1e-9", closed_ok && violations == 0, detail)
}

pub fn gff_fidelity(seed: u64, plan: &Plan) -> ClaimRecord {
    let k = plan.gff_samples as f64;
    let p3 = GffSampler::<f64>::new(&path3(), 0).expect("connected");
    let mut rng = replica_rng(seed, "claim-gff", 0);
    let far: Vec<f64> = (0..plan.gff_samples).map(|_| p3.draw(&mut rng)[2]).collect();
    let mean = far.iter().sum::<f64>() / k;
    let var = far.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let m4 = far.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / k;
    let var_se = ((m4 - var * var) / k).sqrt();
    let p3_z = (var - 2.0).abs() / var_se;

    let mut worst_z = p3_z;
    for gi in 0..plan.gff_graphs {
        let mut rng = replica_rng(seed, "claim-gff-graphs", gi as u64);
        let n = rng.random_range(3..=12);
        let extra = rng.random_range(0..=n);
        let g = Graph::random_connected(n, extra, &mut rng);
        let sampler = GffSampler::<f64>::new(&g, 0).expect("connected");
        let (v, w) = random_pair(n, &mut rng);
        let want = ResistanceOracle::<f64>::new(&g, 0).expect("connected").resistance(v, w).value;
        let inc: Vec<f64> = (0..plan.gff_samples)
            .map(|_| {
                let eta = sampler.draw(&mut rng);
                (eta[v] - eta[w]).powi(2)
            })
            .collect();
        let (m, se) = mean_se(&inc);
        worst_z = worst_z.max((m - want).abs() / se);
    }
    ClaimRecord::new(
        3,
        worst_z,
        "every |deviation|/SE ≤ 3",
        worst_z <= 3.0,
        format!("P3 far-end variance {var:.4} ± {var_se:.4}; {} random graphs", plan.gff_graphs),
    )
}

pub fn closed_form_m(seed: u64, plan: &Plan) -> ClaimRecord {
    let inv = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    // maximum of a two-step random walk: (1 + 1/√2) / √(2π)
    let cases = [("edge", graph(2, &[(0, 1)]), inv), ("P3", path3(), inv * (1.0 + 0.5f64.sqrt()))];
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (i, (name, g, want)) in cases.iter().enumerate() {
        let est = estimate_m(g, 0, plan.m_replicas, derive_seed(seed, "claim-m", i as u64, 0)).expect("connected");
        let z = (est.mean - want).abs() / est.se;
        worst = worst.max(z);
        detail.push(format!("{name} {:.5} ± {:.5} vs {want:.5}", est.mean, est.se));
    }
    ClaimRecord::new(4, worst, "every |deviation|/SE ≤ 3", worst <= 3.0, detail.join("; "))
}

pub fn iid_max(seed: u64, plan: &Plan) -> ClaimRecord {
    let maxima: Vec<f64> = (0..plan.iid_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, "claim-iid", r);
            (0..plan.iid_s).map(|_| StandardNormal.sample(&mut rng)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (mean, se) = mean_se(&maxima);
    let formula = expected_max_iid_normals(plan.iid_s as u64);
    let dev = (mean - formula).abs();
    ClaimRecord::new(
        5,
        dev,
        "|MC − formula| ≤ 0.03",
        dev <= 0.03,
        format!("s={}: MC {mean:.4} ± {se:.4}, formula {formula:.4}", plan.iid_s),
    )
}

pub fn cover_oracle(seed: u64, plan: &Plan) -> (ClaimRecord, CoverTimes) {
    let mut graphs = vec![(path3(), vec![0, 1]), (graph(3, &[(0, 1), (1, 2), (0, 2)]), vec![0])];
    for gi in graphs.len()..plan.cover_graphs {
        let mut rng = replica_rng(seed, "claim-cover-graphs", gi as u64);
        let n = rng.random_range(4..=10);
        let extra = rng.random_range(0..=n);
        graphs.push((Graph::random_connected(n, extra, &mut rng), vec![0]));
    }
    let mut worst = 0.0f64;
    let mut times = Vec::new();
    let mut comparisons = 0;
    for (gi, (g, starts)) in graphs.iter().enumerate() {
        let exact: Vec<f64> = (0..g.vertex_count()).map(|s| exact_cover_small::<f64>(g, s).expect("small graph")).collect();
        times.push((g.vertex_count(), exact.iter().copied().fold(0.0, f64::max)));
        for &s in starts {
            let est = simulate_cover(g, s, plan.cover_replicas, derive_seed(seed, "claim-cover", gi as u64, 0), None)
                .expect("connected");
            worst = worst.max((est.mean - exact[s]).abs() / est.se);
            comparisons += 1;
        }
    }
    let p3: Vec<f64> = (0..3).map(|s| exact_cover_small::<f64>(&graphs[0].0, s).unwrap()).collect();
    let tri = exact_cover_small::<f64>(&graphs[1].0, 0).unwrap();
    let exact_ok = (p3[0] - 4.0).abs() < 1e-9 && (p3[1] - 5.0).abs() < 1e-9 && (tri - 3.0).abs() < 1e-9;
    let record = ClaimRecord::new(
        6,
        worst,
        "every |MC − exact|/SE ≤ 3; P3 {4,5}, triangle 3",
        worst <= 3.0 && exact_ok,
        format!("{comparisons} comparisons on {} graphs; P3 end {} middle {}, triangle {}", graphs.len(), p3[0], p3[1], tri),
    );
    (record, times)
}

/// `(|E|/2εn, N≥3/(4/3)ε³n, trees deeper than 2 ln N/ε, census exponent)`.
type Row = (f64, f64, usize, Option<f64>);

pub fn giant_statistics(seed: u64, plan: &Plan) -> ClaimRecord {
    let (n, eps) = plan.stats_params;
    let params = ModelParams::new(n, eps).expect("valid parameters");
    let rows: Vec<Row> = (0..plan.stats_seeds as u64)
        .into_par_iter()
        .map(|s| {
            let gs = sample_giant(&params, derive_seed(seed, "claim-giant", 0, s)).expect("sampled giant");
            let rep = apoh_report(&gs, 0.5, &CensusConstants::default());
            let trees = rep.trees.as_ref();
            (
                rep.h_edges.ratio,
                rep.k1_vertices.ratio,
                trees.map_or(0, |t| t.trees_exceeding_ceiling),
                trees.and_then(|t| t.census.exponent),
            )
        })
        .collect();
    let k = rows.len() as f64;
    let mean = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).sum::<f64>() / k;
    let range = |f: &dyn Fn(&Row) -> f64| {
        rows.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let exponent_of = |r: &Row| r.3.unwrap_or(f64::NAN);
    let (edges, kernel, exponent) = (mean(&|r| r.0), mean(&|r| r.1), mean(&exponent_of));
    let deep: usize = rows.iter().map(|r| r.2).sum();
    let ok = (0.85..=1.15).contains(&edges)
        && (0.7..=1.3).contains(&kernel)
        && (0.3..=0.7).contains(&exponent)
        && deep == 0;
    let (e, c, x) = (range(&|r| r.0), range(&|r| r.1), range(&exponent_of));
    ClaimRecord::new(
        7,
        edges,
        "seed means: |E|/2εn ∈ [0.85,1.15], N≥3/(4/3)ε³n ∈ [0.7,1.3], exponent ∈ [0.3,0.7]; no tree deeper than 2 ln N/ε",
        ok,
        format!(
            "{} seeds, mean (range): |E|/2εn {edges:.3} ({:.3}..{:.3}), kernel {kernel:.3} ({:.3}..{:.3}), exponent {exponent:.3} ({:.3}..{:.3}), deep trees {deep}",
            rows.len(),
            e.0,
            e.1,
            c.0,
            c.1,
            x.0,
            x.1
        ),
    )
}

pub fn skeleton_lemmas(seed: u64, plan: &Plan) -> ClaimRecord {
    let mut violations = 0usize;
    let mut checked = 0usize;
    let mut hierarchies = 0;
    for (pi, &(n, eps)) in plan.skeleton_params.iter().enumerate() {
        let params = ModelParams::new(n, eps).expect("valid parameters");
        for s in 0..plan.skeleton_seeds as u64 {
            let gs = sample_giant(&params, derive_seed(seed, "claim-skeleton", pi as u64, s)).expect("sampled giant");
            let h = build_hierarchy(&gs).expect("hierarchy builds");
            let p = validate_hierarchy(&gs, &h).expect("validation runs");
            let b = verify_budgets_for(&h, &params).expect("chains decompose");
            let d = dyadic_k2_pairs(&gs).expect("pairs build");
            violations += p.a_violations
                + p.b_violations
                + p.c_violations
                + p.d_violations
                + p.w_nesting_violations
                + p.u_violations
                + p.alpha_violations
                + b.budget_violations
                + b.link_violations
                + d.bound_violations
                + d.i0_non_edges
                + d.walk_violations
                + d.distance_violations;
            checked += b.vertices_checked;
            hierarchies += 1;
        }
    }
    ClaimRecord::new(
        8,
        violations as f64,
        "0 violations",
        violations == 0,
        format!("{hierarchies} hierarchies, {checked} vertices decomposed"),
    )
}

pub fn headline_trend(seed: u64, plan: &Plan) -> (ClaimRecord, CoverTimes) {
    let mut m_ratio = Vec::new();
    let mut cover_ratio = Vec::new();
    let mut dlp_ratio = Vec::new();
    let mut times = Vec::new();
    for (gi, &big_n) in plan.trend_big_n.iter().enumerate() {
        let params = ModelParams::for_big_n(big_n, plan.trend_eps).expect("valid parameters");
        let ln_n = params.big_n.ln();
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for s in 0..plan.trend_seeds as u64 {
            let gs = sample_giant(&params, derive_seed(seed, "claim-trend", gi as u64, s)).expect("sampled giant");
            let g = &gs.graph;
            let m = estimate_m(g, 0, plan.trend_m_replicas, derive_seed(seed, "claim-trend-gff", gi as u64, s))
                .expect("connected")
                .mean;
            let mut panel = start_panel(&gs, 0, &mut rng_from_seed(derive_seed(seed, "claim-trend-panel", gi as u64, s)));
            panel.truncate(plan.trend_starts);
            let walk_seed = derive_seed(seed, "claim-trend-cover", gi as u64, s);
            let cover = panel
                .iter()
                .map(|&v| simulate_cover(g, v, plan.trend_cover_replicas, walk_seed, None).expect("connected").mean)
                .fold(0.0, f64::max);
            times.push((g.vertex_count(), cover));
            a += m * (2.0 * params.eps).sqrt() / ln_n;
            b += cover / (params.n as f64 * ln_n * ln_n);
            c += cover / (g.edge_count() as f64 * m * m);
        }
        let k = plan.trend_seeds as f64;
        m_ratio.push(a / k);
        cover_ratio.push(b / k);
        dlp_ratio.push(c / k);
    }
    let toward_one = |xs: &[f64]| xs.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    let bounded = dlp_ratio.iter().all(|r| (0.5..=2.0).contains(r));
    let ok = toward_one(&m_ratio) && toward_one(&cover_ratio) && bounded;
    let series = |name: &str, values: &[f64]| Series { name: name.to_string(), grid: plan.trend_big_n.clone(), values: values.to_vec() };
    let mut record = ClaimRecord::new(
        9,
        *dlp_ratio.iter().fold(&0.0, |a, b| if b > a { b } else { a }),
        "both ratios move monotonically toward 1; τ/(|E|M²) ∈ [0.5, 2] everywhere",
        ok,
        format!(
            "N={:?}: M√(2ε)/ln N {:.3?}, τ/(n ln²N) {:.3?}, τ/(|E|M²) {:.3?}",
            plan.trend_big_n, m_ratio, cover_ratio, dlp_ratio
        ),
    );
    if ok {
        record.verdict = Verdict::Trend;
    }
    record.series = vec![
        series("m_ratio", &m_ratio),
        series("cover_ratio", &cover_ratio),
        series("cover_over_edges_m2", &dlp_ratio),
    ];
    (record, times)
}

pub fn feige_sanity(times: &[(usize, f64)]) -> ClaimRecord {
    let mut worst = f64::INFINITY;
    let mut outside = 0;
    let mut used = 0;
    for &(n, t) in times.iter().filter(|(n, _)| *n >= FEIGE_MIN_VERTICES) {
        let v = n as f64;
        let lo = 0.9 * v * v.ln();
        let hi = 1.1 * 4.0 / 27.0 * v.powi(3);
        outside += usize::from(t < lo || t > hi);
        worst = worst.min((t / lo).min(hi / t));
        used += 1;
    }
    ClaimRecord::new(
        10,
        worst,
        "every cover time in [0.9 n ln n, 1.1 (4/27) n³]; measured = smallest margin factor ≥ 1",
        outside == 0 && used > 0,
        format!("{used} cover times on graphs with ≥ {FEIGE_MIN_VERTICES} vertices, {outside} outside"),
    )
}

/// Runs claims 1–10 and assembles the ledger. `progress` receives each
/// record as soon as it is final.
pub fn verify_suite(cfg: &ExperimentConfig, mut progress: impl FnMut(&ClaimRecord)) -> ClaimsLedger {
    let plan = Plan::for_scale(cfg.verify.scale);
    let seed = cfg.seed;
    let mut claims = Vec::with_capacity(10);
    let mut push = |r: ClaimRecord, claims: &mut Vec<ClaimRecord>| {
        progress(&r);
        claims.push(r);
    };
    push(commute_identity(seed, &plan, cfg.verify.literal_commute), &mut claims);
    push(resistance_oracle(seed, &plan), &mut claims);
    push(gff_fidelity(seed, &plan), &mut claims);
    push(closed_form_m(seed, &plan), &mut claims);
    push(iid_max(seed, &plan), &mut claims);
    let (r6, mut times) = cover_oracle(seed, &plan);
    push(r6, &mut claims);
    push(giant_statistics(seed, &plan), &mut claims);
    push(skeleton_lemmas(seed, &plan), &mut claims);
    let (r9, t9) = headline_trend(seed, &plan);
    times.extend(t9);
    push(r9, &mut claims);
    push(feige_sanity(&times), &mut claims);
    ClaimsLedger { master_seed: seed, scale: cfg.verify.scale, git: GIT_DESCRIBE.to_string(), config: cfg.hash(), claims }
}
