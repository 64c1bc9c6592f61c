//! Poisson(μ) Galton–Watson trees: sampling, the exact level-survival
//! recursion, and the depth census over the trees of a giant sample.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use thiserror::Error;

use crate::giant::GiantSample;
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum GwError {
    #[error("offspring mean {0} outside [0, 1)")]
    MuOutOfRange(f64),
    #[error("gamma {0} outside (0, 1)")]
    GammaOutOfRange(f64),
}

/// A rooted tree stored in breadth-first order; vertex 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwTree {
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<u32>,
    pub depth_max: u32,
    /// Generation stopped at the depth cap with vertices still to expand.
    pub truncated: bool,
}

impl GwTree {
    pub fn size(&self) -> usize {
        self.parent.len()
    }
}

/// Offspring law for subcritical Poisson trees; `None` when μ = 0.
pub(crate) fn offspring(mu: f64) -> Option<Poisson<f64>> {
    (mu > 0.0).then(|| Poisson::new(mu).expect("positive finite mean"))
}

/// Breadth-first Poisson(μ) Galton–Watson tree, cut at `depth_cap`.
pub fn sample_pgw_tree<R: Rng + ?Sized>(mu: f64, depth_cap: u32, rng: &mut R) -> Result<GwTree, GwError> {
    if !(0.0..1.0).contains(&mu) {
        return Err(GwError::MuOutOfRange(mu));
    }
    let law = offspring(mu);
    let mut tree = GwTree { parent: vec![None], depth: vec![0], depth_max: 0, truncated: false };
    grow(&mut tree, law.as_ref(), depth_cap.max(1), rng);
    Ok(tree)
}

/// Expands `tree` breadth-first from its current vertices.
pub(crate) fn grow<R: Rng + ?Sized>(tree: &mut GwTree, law: Option<&Poisson<f64>>, depth_cap: u32, rng: &mut R) {
    let Some(law) = law else { return };
    let mut head = 0;
    while head < tree.parent.len() {
        let d = tree.depth[head];
        let kids = law.sample(rng) as usize;
        if kids > 0 {
            if d >= depth_cap {
                tree.truncated = true;
            } else {
                for _ in 0..kids {
                    tree.parent.push(Some(head));
                    tree.depth.push(d + 1);
                }
                tree.depth_max = tree.depth_max.max(d + 1);
            }
        }
        head += 1;
    }
}

/// `p[k] = Pr(level k of a PGW(μ) tree is nonempty)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve<T> {
    pub mu: T,
    pub p: Vec<T>,
}

impl<T: Real> SurvivalCurve<T> {
    pub fn at(&self, k: usize) -> T {
        self.p[k]
    }
}

/// Iterates `p[k] = 1 - exp(-μ p[k-1])` from `p[0] = 1`.
pub fn survival_prob_exact<T: Real>(mu: T, k_max: usize) -> Result<SurvivalCurve<T>, GwError> {
    if !(mu >= T::zero() && mu < T::one()) {
        return Err(GwError::MuOutOfRange(mu.to_f64_lossy()));
    }
    let mut p = Vec::with_capacity(k_max + 1);
    p.push(T::one());
    for k in 1..=k_max {
        // 1 - e^{-x} evaluated as -expm1(-x) keeps precision for small x
        let next = -(-(mu * p[k - 1])).exp_m1();
        p.push(next);
    }
    Ok(SurvivalCurve { mu, p })
}

/// Unknown absolute constants used only to draw report bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusConstants {
    pub c1: f64,
    pub c2: f64,
    pub c_eps: f64,
}

impl Default for CensusConstants {
    fn default() -> Self {
        CensusConstants { c1: 0.1, c2: 10.0, c_eps: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthCensus {
    pub gamma: f64,
    /// `floor(γ ln N / ε)`.
    pub threshold: u32,
    /// Trees with depth at least `threshold`.
    pub count: usize,
    pub tree_total: usize,
    /// `ln(count) / ln N`; `None` when the count is zero.
    pub exponent: Option<f64>,
    pub band: (f64, f64),
    pub in_band: bool,
}

/// Counts attached trees reaching depth `floor(γ ε⁻¹ ln N)`.
pub fn depth_census(gs: &GiantSample, gamma: f64, consts: &CensusConstants) -> Result<DepthCensus, GwError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GwError::GammaOutOfRange(gamma));
    }
    let p = &gs.params;
    let ln_n = p.big_n.ln();
    let threshold = (gamma * ln_n / p.eps).floor().max(0.0) as u32;
    let count = gs.trees.iter().filter(|t| t.depth_max >= threshold).count();
    let lo = 0.5 * consts.c1 * p.big_n.powf(1.0 - gamma - consts.c_eps * p.eps);
    let hi = 2.0 * consts.c2 * p.big_n.powf(1.0 - gamma + consts.c_eps * p.eps);
    let c = count as f64;
    Ok(DepthCensus {
        gamma,
        threshold,
        count,
        tree_total: gs.trees.len(),
        exponent: (count > 0 && ln_n > 0.0).then(|| c.ln() / ln_n),
        band: (lo, hi),
        in_band: c >= lo && c <= hi,
    })
}

/// Deepest attached tree compared with `2 ln N / ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthCeiling {
    pub max_depth: u32,
    pub ceiling: f64,
    pub trees_exceeding: usize,
}

pub fn depth_ceiling(gs: &GiantSample) -> DepthCeiling {
    let ceiling = 2.0 * gs.params.big_n.ln() / gs.params.eps;
    DepthCeiling {
        max_depth: gs.trees.iter().map(|t| t.depth_max).max().unwrap_or(0),
        ceiling,
        trees_exceeding: gs.trees.iter().filter(|t| t.depth_max as f64 > ceiling).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::giant::solve_mu;
    use crate::seed::rng_from_seed;

    #[test]
    fn zero_mean_curve_dies_immediately() {
        let c = survival_prob_exact(0.0f64, 5).unwrap();
        assert_eq!(c.p[0], 1.0);
        assert!(c.p[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn first_level_closed_form() {
        let c = survival_prob_exact(0.9f64, 1).unwrap();
        assert!((c.p[1] - (1.0 - (-0.9f64).exp())).abs() < 1e-15);
        assert!((c.p[1] - 0.593_430_340_259_400_9).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_mu() {
        assert_eq!(survival_prob_exact(1.0f64, 3), Err(GwError::MuOutOfRange(1.0)));
        assert!(survival_prob_exact(-0.1f64, 3).is_err());
        let mut rng = rng_from_seed(1);
        assert!(sample_pgw_tree(1.2, 5, &mut rng).is_err());
    }

    #[test]
    fn small_depth_bound_below_inverse_eps() {
        let eps = 0.1;
        let mu = solve_mu(eps).unwrap();
        let c = survival_prob_exact(mu, 10).unwrap();
        for k in 1..10 {
            assert!(c.p[k] < 10.0 / k as f64, "k={k} p={}", c.p[k]);
        }
    }

    #[test]
    fn curve_is_monotone_and_vanishes() {
        for &mu in &[0.3f64, 0.7, 0.9, 0.97] {
            let k = (10.0 / (1.0 - mu)).ceil() as usize;
            let c = survival_prob_exact(mu, k).unwrap();
            for w in c.p.windows(2) {
                assert!(w[1] <= w[0] && w[1] > 0.0);
                assert_eq!(w[1], -(-(mu * w[0])).exp_m1());
            }
            assert!(c.p[k] < 0.05);
        }
    }

    #[test]
    fn f32_curve_tracks_f64() {
        let a = survival_prob_exact(0.9f32, 30).unwrap();
        let b = survival_prob_exact(0.9f64, 30).unwrap();
        for (x, y) in a.p.iter().zip(&b.p) {
            assert!((*x as f64 - y).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_mean_tree_is_a_point() {
        let mut rng = rng_from_seed(3);
        let t = sample_pgw_tree(0.0, 10, &mut rng).unwrap();
        assert_eq!(t.size(), 1);
        assert_eq!(t.depth_max, 0);
        assert!(!t.truncated);
    }

    #[test]
    fn tree_structure_invariants() {
        let mut rng = rng_from_seed(11);
        for _ in 0..200 {
            let t = sample_pgw_tree(0.95, 6, &mut rng).unwrap();
            assert_eq!(t.depth[0], 0);
            for v in 1..t.size() {
                let p = t.parent[v].unwrap();
                assert!(p < v);
                assert_eq!(t.depth[v], t.depth[p] + 1);
            }
            assert!(t.depth_max <= 6);
            assert_eq!(t.depth_max, *t.depth.iter().max().unwrap());
        }
    }
}
