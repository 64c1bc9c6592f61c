//! Random-walk cover times: simulation, an exact oracle for tiny graphs,
//! and the predictor stack they are compared against.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::giant::{GiantSample, ModelParams};
use crate::graph::{Graph, VertexId};
use crate::linalg::solve_exact;
use crate::scalar::Field;
use crate::seed::replica_rng;

pub const EXACT_COVER_LIMIT: usize = 14;
pub const MIN_COVER_REPLICAS: usize = 10;
/// Random starts in the default panel, next to the pin and a deepest leaf.
pub const PANEL_RANDOM_STARTS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("{0} vertices exceed the exact limit {EXACT_COVER_LIMIT}")]
    TooLarge(usize),
    #[error("walk from {start} exceeded {budget} steps")]
    StepBudgetExceeded { start: VertexId, budget: u64 },
    #[error("at least {MIN_COVER_REPLICAS} replicas are required, got {0}")]
    TooFewReplicas(usize),
    #[error("start {0} is not a vertex")]
    BadStart(VertexId),
}

/// `10⁴ |E| ln |V|`, rounded up.
pub fn default_step_budget(g: &Graph) -> u64 {
    let n = g.vertex_count().max(2) as f64;
    (1e4 * g.edge_count().max(1) as f64 * n.ln()).ceil() as u64
}

/// Steps of one walk from `start` until every vertex has been seen.
pub fn cover_steps<R: Rng + ?Sized>(g: &Graph, start: VertexId, budget: u64, rng: &mut R) -> Result<u64, WalkError> {
    let n = g.vertex_count();
    let mut seen = vec![0u64; n.div_ceil(64)];
    seen[start / 64] |= 1 << (start % 64);
    let mut left = n - 1;
    let mut v = start;
    let mut steps = 0u64;
    while left > 0 {
        if steps == budget {
            return Err(WalkError::StepBudgetExceeded { start, budget });
        }
        let nb = g.neighbors(v);
        v = nb[rng.random_range(0..nb.len())];
        steps += 1;
        let (w, b) = (v / 64, 1u64 << (v % 64));
        if seen[w] & b == 0 {
            seen[w] |= b;
            left -= 1;
        }
    }
    Ok(steps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverEstimate {
    pub start: VertexId,
    pub mean: f64,
    pub se: f64,
    pub steps: Vec<u64>,
}

/// Monte Carlo cover time from `start`. Replica `r` walks on the stream
/// derived from `(seed, start, r)`.
pub fn simulate_cover(
    g: &Graph,
    start: VertexId,
    replicas: usize,
    seed: u64,
    budget: Option<u64>,
) -> Result<CoverEstimate, WalkError> {
    if replicas < MIN_COVER_REPLICAS {
        return Err(WalkError::TooFewReplicas(replicas));
    }
    if start >= g.vertex_count() {
        return Err(WalkError::BadStart(start));
    }
    if !g.is_connected() {
        return Err(WalkError::Disconnected);
    }
    let budget = budget.unwrap_or_else(|| default_step_budget(g));
    let stage = format!("cover:{start}");
    let steps = (0..replicas as u64)
        .into_par_iter()
        .map(|r| cover_steps(g, start, budget, &mut replica_rng(seed, &stage, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let (mean, se) = mean_se(&steps);
    Ok(CoverEstimate { start, mean, se, steps })
}

fn mean_se(xs: &[u64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Exact expected cover time from `start` over any field.
///
/// For each visited set `S` (largest first) the values `E[v, S]`, `v ∈ S`,
/// solve `E[v,S] = 1 + mean_{u~v} E[u, S ∪ {u}]`, where neighbors outside
/// `S` refer to sets already solved.
pub fn exact_cover_small<F: Field>(g: &Graph, start: VertexId) -> Result<F, WalkError> {
    let n = g.vertex_count();
    if n > EXACT_COVER_LIMIT {
        return Err(WalkError::TooLarge(n));
    }
    if start >= n {
        return Err(WalkError::BadStart(start));
    }
    if !g.is_connected() {
        return Err(WalkError::Disconnected);
    }
    let full = (1usize << n) - 1;
    // e[S][v]; only entries with v ∈ S are meaningful
    let mut e: Vec<Vec<F>> = vec![Vec::new(); 1 << n];
    e[full] = vec![F::zero(); n];
    for s in (1..full).rev() {
        let members: Vec<VertexId> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
        let pos = |v: VertexId| members.iter().position(|&m| m == v);
        let k = members.len();
        let mut a = vec![vec![F::zero(); k]; k];
        let mut b = vec![F::one(); k];
        for (i, &v) in members.iter().enumerate() {
            a[i][i] = F::one();
            let d = F::from_usize(g.degree(v));
            for &u in g.neighbors(v) {
                let p = F::one() / d.clone();
                match pos(u) {
                    Some(j) => a[i][j] = a[i][j].clone() - p,
                    None => b[i] = b[i].clone() + p * e[s | 1 << u][u].clone(),
                }
            }
        }
        let x = solve_exact(a, b).expect("every state can leave a proper subset");
        let mut row = vec![F::zero(); n];
        for (i, &v) in members.iter().enumerate() {
            row[v] = x[i].clone();
        }
        e[s] = row;
    }
    Ok(if n == 1 { F::zero() } else { e[1 << start][start].clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictorConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for PredictorConstants {
    fn default() -> Self {
        PredictorConstants { c1: 0.5, c2: 2.0 }
    }
}

pub const DEFAULT_LAMBDAS: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZhaiBand {
    pub lambda: f64,
    pub band: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predictors {
    /// `n ln² N`.
    pub headline: f64,
    /// `|E| M²`.
    pub edges_m2: f64,
    pub dlp: Band,
    pub zhai: Vec<ZhaiBand>,
    /// `[n ln n, (4/27) n³]` for the walked graph's vertex count.
    pub feige: Band,
}

/// Predictor values for a graph with `vertices` vertices and `edges` edges
/// whose GFF maximum is `m` and largest resistance is `r`.
pub fn predict_cover(
    params: &ModelParams,
    vertices: usize,
    edges: usize,
    m: f64,
    r: f64,
    consts: &PredictorConstants,
    lambdas: &[f64],
) -> Predictors {
    let e = edges as f64;
    let em2 = e * m * m;
    let zhai = lambdas
        .iter()
        .map(|&lambda| {
            let w = e * ((lambda * r).sqrt() * m + lambda * r);
            ZhaiBand { lambda, band: Band { lo: em2 - w, hi: em2 + w } }
        })
        .collect();
    Predictors {
        headline: params.n as f64 * params.big_n.ln().powi(2),
        edges_m2: em2,
        dlp: Band { lo: consts.c1 * em2, hi: consts.c2 * em2 },
        zhai,
        feige: feige_band(vertices),
    }
}

pub fn feige_band(vertices: usize) -> Band {
    let v = vertices as f64;
    Band { lo: v * v.ln(), hi: 4.0 / 27.0 * v.powi(3) }
}

/// Start panel: the pin, the lowest-id deepest tree vertex, and
/// `PANEL_RANDOM_STARTS` random vertices (duplicates dropped).
pub fn start_panel<R: Rng + ?Sized>(gs: &GiantSample, pin: VertexId, rng: &mut R) -> Vec<VertexId> {
    let deepest = (0..gs.graph.vertex_count()).max_by_key(|&v| (gs.depth[v], std::cmp::Reverse(v))).unwrap_or(pin);
    let mut panel = vec![pin];
    if deepest != pin {
        panel.push(deepest);
    }
    for _ in 0..PANEL_RANDOM_STARTS {
        let v = rng.random_range(0..gs.graph.vertex_count());
        if !panel.contains(&v) {
            panel.push(v);
        }
    }
    panel
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverTimeReport {
    pub starts: Vec<CoverEstimate>,
    /// Largest per-start mean.
    pub cover: f64,
    pub predictors: Predictors,
    /// `(name, measured / predicted)` rows.
    pub ratios: Vec<(String, f64)>,
}

pub fn cover_report(starts: Vec<CoverEstimate>, predictors: Predictors) -> CoverTimeReport {
    let cover = starts.iter().map(|s| s.mean).fold(0.0, f64::max);
    let ratios = vec![
        ("headline".to_string(), cover / predictors.headline),
        ("edges_m2".to_string(), cover / predictors.edges_m2),
        ("feige_lo".to_string(), cover / predictors.feige.lo),
    ];
    CoverTimeReport { starts, cover, predictors, ratios }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Role;
    use num::BigRational;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::with_uniform_role(n, edges, Role::Kernel).unwrap()
    }

    fn rat(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    #[test]
    fn exact_values() {
        let e = g(2, &[(0, 1)]);
        assert_eq!(exact_cover_small::<BigRational>(&e, 0).unwrap(), rat(1));
        let p3 = g(3, &[(0, 1), (1, 2)]);
        assert_eq!(exact_cover_small::<BigRational>(&p3, 0).unwrap(), rat(4));
        assert_eq!(exact_cover_small::<BigRational>(&p3, 1).unwrap(), rat(5));
        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        for s in 0..3 {
            assert_eq!(exact_cover_small::<BigRational>(&tri, s).unwrap(), rat(3));
            assert!((exact_cover_small::<f64>(&tri, s).unwrap() - 3.0).abs() < 1e-12);
        }
        // K4: coupon collector 3 (1 + 1/2 + 1/3) = 11/2
        let k4 = g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(exact_cover_small::<BigRational>(&k4, 0).unwrap(), BigRational::new(11.into(), 2.into()));
        assert_eq!(exact_cover_small::<f64>(&g(15, &[]), 0), Err(WalkError::TooLarge(15)));
        assert_eq!(exact_cover_small::<f64>(&g(3, &[(0, 1)]), 0), Err(WalkError::Disconnected));
    }

    #[test]
    fn simulation_examples() {
        let e = g(2, &[(0, 1)]);
        let est = simulate_cover(&e, 1, 50, 1, None).unwrap();
        assert!(est.steps.iter().all(|&s| s == 1));
        let p3 = g(3, &[(0, 1), (1, 2)]);
        let est = simulate_cover(&p3, 1, 10_000, 2, None).unwrap();
        assert!((est.mean - 5.0).abs() < 3.0 * est.se);
        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        let est = simulate_cover(&tri, 2, 10_000, 3, None).unwrap();
        assert!((est.mean - 3.0).abs() < 3.0 * est.se);
        assert!(est.steps.iter().all(|&s| s >= 2));
        assert_eq!(simulate_cover(&tri, 0, 9, 3, None), Err(WalkError::TooFewReplicas(9)));
        assert_eq!(
            simulate_cover(&p3, 0, 10, 3, Some(2)),
            Err(WalkError::StepBudgetExceeded { start: 0, budget: 2 })
        );
    }

    #[test]
    fn predictor_arithmetic() {
        let p = ModelParams::new(1_000_000, 0.1).unwrap();
        let pr = predict_cover(&p, 100, 150, 0.0, 2.0, &PredictorConstants::default(), &[10.0]);
        assert!((pr.headline / 4.772e7 - 1.0).abs() < 1e-3);
        assert_eq!(pr.edges_m2, 0.0);
        assert_eq!(pr.zhai[0].band, Band { lo: -150.0 * 20.0, hi: 150.0 * 20.0 });
        assert!((pr.feige.lo - 460.517).abs() < 1e-3);
        assert!((pr.feige.hi - 1.481e5).abs() < 1e2);
        assert!(pr.dlp.lo <= pr.dlp.hi);
    }
}
