//! Effective resistance, exact hitting times, and the commute-time identity
//! `τ(v,w) + τ(w,v) = 2|E| R_eff(v,w)`.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::giant::GiantSample;
use crate::graph::{Graph, GraphError, VertexId};
use crate::linalg::{pcg, solve_exact, DenseCholesky, Laplacian, SolveError, SparseCholesky};
use crate::scalar::{Field, Real};

/// Below this many vertices solves use a dense factorization.
pub const DENSE_LIMIT: usize = 2000;
/// Upper size limit of [`hitting_times_exact`].
pub const HITTING_TIME_LIMIT: usize = 10_000;
/// Dense elimination on the walk equations is used up to this size.
const HITTING_DENSE_LIMIT: usize = 600;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ResistanceError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("{0} vertices exceed the limit {1}")]
    TooLarge(usize, usize),
    #[error("residual {0:e} above tolerance {1:e}")]
    ResidualTooLarge(f64, f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Iterative,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resistance<T> {
    pub value: T,
    pub residual: T,
    pub method: Method,
}

fn check_connected(g: &Graph) -> Result<(), ResistanceError> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(ResistanceError::Disconnected)
    }
}

/// `R_eff(v, w)` from one solve of the Laplacian grounded at `w`: dense
/// Cholesky below [`DENSE_LIMIT`] vertices, preconditioned CG (at most
/// `10 √|V|` iterations) above.
pub fn effective_resistance<T: Real>(g: &Graph, v: VertexId, w: VertexId, tol: T) -> Result<Resistance<T>, ResistanceError> {
    if v == w {
        return Ok(Resistance { value: T::zero(), residual: T::zero(), method: Method::Direct });
    }
    check_connected(g)?;
    let lap = Laplacian::<T>::grounded(g, w);
    let mut b = vec![T::zero(); lap.dim()];
    let iv = lap.index_of(v).expect("v is not the pin");
    b[iv] = T::one();
    let (x, method) = if g.vertex_count() < DENSE_LIMIT {
        let c = DenseCholesky::from_rows(&lap.to_dense()).ok_or(SolveError::FactorizationFailed(0))?;
        let mut x = b.clone();
        c.solve(&mut x);
        (x, Method::Direct)
    } else {
        let max_iter = (10.0 * (g.vertex_count() as f64).sqrt()).ceil() as usize;
        (pcg(&lap, &b, tol, max_iter)?.x, Method::Iterative)
    };
    let residual = lap.relative_residual(&x, &b);
    if residual > tol {
        return Err(ResistanceError::ResidualTooLarge(residual.to_f64_lossy(), tol.to_f64_lossy()));
    }
    Ok(Resistance { value: x[iv], residual, method })
}

/// Same as [`effective_resistance`] but always through conjugate gradients
/// with an explicit iteration budget.
pub fn effective_resistance_iterative<T: Real>(
    g: &Graph,
    v: VertexId,
    w: VertexId,
    tol: T,
    max_iter: usize,
) -> Result<Resistance<T>, ResistanceError> {
    if v == w {
        return Ok(Resistance { value: T::zero(), residual: T::zero(), method: Method::Iterative });
    }
    check_connected(g)?;
    let lap = Laplacian::<T>::grounded(g, w);
    let mut b = vec![T::zero(); lap.dim()];
    let iv = lap.index_of(v).expect("v is not the pin");
    b[iv] = T::one();
    let out = pcg(&lap, &b, tol, max_iter)?;
    Ok(Resistance { value: out.x[iv], residual: out.relative_residual, method: Method::Iterative })
}

/// A factored grounded Laplacian answering many resistance queries.
pub struct ResistanceOracle<T> {
    lap: Laplacian<T>,
    factor: SparseCholesky<T>,
}

impl<T: Real> ResistanceOracle<T> {
    pub fn new(g: &Graph, pin: VertexId) -> Result<Self, ResistanceError> {
        check_connected(g)?;
        let lap = Laplacian::<T>::grounded(g, pin);
        let factor = SparseCholesky::factor(&lap)?;
        Ok(ResistanceOracle { lap, factor })
    }

    pub fn pin(&self) -> VertexId {
        self.lap.pin().expect("grounded")
    }

    pub fn laplacian(&self) -> &Laplacian<T> {
        &self.lap
    }

    pub fn factor(&self) -> &SparseCholesky<T> {
        &self.factor
    }

    pub fn resistance(&self, v: VertexId, w: VertexId) -> Resistance<T> {
        if v == w {
            return Resistance { value: T::zero(), residual: T::zero(), method: Method::Direct };
        }
        let mut b = vec![T::zero(); self.lap.dim()];
        let iv = self.lap.index_of(v);
        let iw = self.lap.index_of(w);
        if let Some(i) = iv {
            b[i] += T::one();
        }
        if let Some(i) = iw {
            b[i] -= T::one();
        }
        let mut x = b.clone();
        self.factor.solve(&mut x);
        let value = iv.map_or(T::zero(), |i| x[i]) - iw.map_or(T::zero(), |i| x[i]);
        let residual = self.lap.relative_residual(&x, &b);
        Resistance { value, residual, method: Method::Direct }
    }

    /// `R_eff(v, pin)` for each listed vertex.
    pub fn to_pin(&self, vertices: &[VertexId]) -> Vec<T> {
        let pin = self.pin();
        vertices.iter().map(|&v| self.resistance(v, pin).value).collect()
    }
}

/// Expected hitting times `τ(v, target)` for every `v`.
///
/// Small graphs solve the walk equations `h(v) = 1 + mean_{u~v} h(u)`
/// directly by elimination; larger ones solve the equivalent grounded
/// system `L_target h = deg` with the sparse factorization.
pub fn hitting_times_exact(g: &Graph, target: VertexId) -> Result<Vec<f64>, ResistanceError> {
    let n = g.vertex_count();
    if n > HITTING_TIME_LIMIT {
        return Err(ResistanceError::TooLarge(n, HITTING_TIME_LIMIT));
    }
    check_connected(g)?;
    if n <= HITTING_DENSE_LIMIT {
        return Ok(hitting_times_field::<f64>(g, target));
    }
    let lap = Laplacian::<f64>::grounded(g, target);
    let b: Vec<f64> = (0..lap.dim()).map(|i| g.degree(lap.vertex_of(i)) as f64).collect();
    let mut x = b.clone();
    SparseCholesky::factor(&lap)?.solve(&mut x);
    let residual = lap.relative_residual(&x, &b);
    if residual > 1e-9 {
        return Err(ResistanceError::ResidualTooLarge(residual, 1e-9));
    }
    let mut h = vec![0.0; n];
    for (i, xi) in x.into_iter().enumerate() {
        h[lap.vertex_of(i)] = xi;
    }
    Ok(h)
}

/// Hitting times over an arbitrary field, from the random-walk form
/// `(I − P) h = 1` on the non-target vertices. With rationals the answer
/// is exact.
pub fn hitting_times_field<F: Field>(g: &Graph, target: VertexId) -> Vec<F> {
    let n = g.vertex_count();
    let idx: Vec<Option<usize>> = {
        let mut k = 0;
        (0..n)
            .map(|v| {
                (v != target).then(|| {
                    k += 1;
                    k - 1
                })
            })
            .collect()
    };
    let m = n - 1;
    let mut a = vec![vec![F::zero(); m]; m];
    for v in 0..n {
        let Some(i) = idx[v] else { continue };
        a[i][i] = F::one();
        let d = F::from_usize(g.degree(v));
        for &u in g.neighbors(v) {
            if let Some(j) = idx[u] {
                a[i][j] = a[i][j].clone() - F::one() / d.clone();
            }
        }
    }
    let x = solve_exact(a, vec![F::one(); m]).expect("connected graph gives a nonsingular system");
    (0..n).map(|v| idx[v].map_or(F::zero(), |i| x[i].clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommuteCheck {
    pub v: VertexId,
    pub w: VertexId,
    pub tau_vw: f64,
    pub tau_wv: f64,
    pub reff: f64,
    pub edges: usize,
    /// `|τ(v,w) + τ(w,v) − 2|E| R| / (2|E| R)`.
    pub relative_residual: f64,
    /// The same quantity against `|E| R` (no factor 2), for comparison.
    pub literal_relative_residual: f64,
}

/// Commute-time identity check, with hitting times and the resistance from
/// independent solvers.
pub fn commute_identity_check(g: &Graph, v: VertexId, w: VertexId) -> Result<CommuteCheck, ResistanceError> {
    let tau_vw = hitting_times_exact(g, w)?[v];
    let tau_wv = hitting_times_exact(g, v)?[w];
    let reff = effective_resistance::<f64>(g, v, w, DEFAULT_TOL)?.value;
    let m = g.edge_count() as f64;
    let sum = tau_vw + tau_wv;
    let rel = |scale: f64| {
        let want = scale * m * reff;
        if want == 0.0 {
            sum.abs()
        } else {
            (sum - want).abs() / want
        }
    };
    Ok(CommuteCheck {
        v,
        w,
        tau_vw,
        tau_wv,
        reff,
        edges: g.edge_count(),
        relative_residual: rel(2.0),
        literal_relative_residual: rel(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResistance {
    pub v: VertexId,
    pub w: VertexId,
    pub dist: usize,
    pub reff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxResistanceEstimate {
    pub k2: PairResistance,
    pub h: PairResistance,
    /// `R_K2 · ε`.
    pub k2_scaled: f64,
    /// `R_H · ε / ln N`.
    pub h_scaled: f64,
    pub pairs_evaluated: usize,
    /// Pairs whose resistance exceeded the hop distance (must be zero).
    pub distance_violations: usize,
}

fn far_pairs(g: &Graph, from: VertexId) -> Result<(VertexId, VertexId), GraphError> {
    let d = g.bfs_distances(&[from])?;
    let a = (0..g.vertex_count()).max_by_key(|&v| (d.get(v), std::cmp::Reverse(v))).unwrap_or(from);
    let d2 = g.bfs_distances(&[a])?;
    let b = (0..g.vertex_count()).max_by_key(|&v| (d2.get(v), std::cmp::Reverse(v))).unwrap_or(a);
    Ok((a, b))
}

fn max_over_pairs<R: Rng + ?Sized>(
    g: &Graph,
    oracle: &ResistanceOracle<f64>,
    pool: &[VertexId],
    budget: usize,
    rng: &mut R,
    violations: &mut usize,
) -> Result<(PairResistance, usize), ResistanceError> {
    let (a, b) = far_pairs(g, pool[0])?;
    let mut pairs = vec![(a, b), (oracle.pin(), b)];
    for _ in 0..budget {
        let v = *pool.choose(rng).expect("nonempty pool");
        let w = *pool.choose(rng).expect("nonempty pool");
        pairs.push((v, w));
    }
    let mut best = PairResistance { v: a, w: a, dist: 0, reff: 0.0 };
    for &(v, w) in &pairs {
        let r = oracle.resistance(v, w).value;
        let dist = g.bfs_distances(&[v])?.get(w).expect("connected");
        if r > dist as f64 * (1.0 + 1e-9) + 1e-9 {
            *violations += 1;
        }
        if r > best.reff {
            best = PairResistance { v, w, dist, reff: r };
        }
    }
    Ok((best, pairs.len()))
}

/// Largest effective resistance found among `pair_budget` random pairs plus
/// a BFS double-sweep pair, separately on `K2` and on `H`.
pub fn max_resistance_estimate<R: Rng + ?Sized>(
    gs: &GiantSample,
    pair_budget: usize,
    rng: &mut R,
) -> Result<MaxResistanceEstimate, ResistanceError> {
    let mut violations = 0;
    let k2 = gs.k2_graph();
    let k2_oracle = ResistanceOracle::<f64>::new(&k2, 0)?;
    let k2_pool: Vec<VertexId> = (0..k2.vertex_count()).collect();
    let (k2_best, n1) = max_over_pairs(&k2, &k2_oracle, &k2_pool, pair_budget, rng, &mut violations)?;
    let h_oracle = ResistanceOracle::<f64>::new(&gs.graph, 0)?;
    let h_pool: Vec<VertexId> = (0..gs.graph.vertex_count()).collect();
    let (h_best, n2) = max_over_pairs(&gs.graph, &h_oracle, &h_pool, pair_budget, rng, &mut violations)?;
    let p = &gs.params;
    Ok(MaxResistanceEstimate {
        k2_scaled: k2_best.reff * p.eps,
        h_scaled: h_best.reff * p.eps / p.big_n.ln(),
        k2: k2_best,
        h: h_best,
        pairs_evaluated: n1 + n2,
        distance_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Role;
    use num::BigRational;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::with_uniform_role(n, edges, Role::Kernel).unwrap()
    }

    #[test]
    fn series_and_parallel_values() {
        let p3 = g(3, &[(0, 1), (1, 2)]);
        let r = effective_resistance(&p3, 0, 2, 1e-12).unwrap();
        assert!((r.value - 2.0f64).abs() < 1e-12);
        assert_eq!(r.method, Method::Direct);
        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!((effective_resistance(&tri, 0, 1, 1e-12).unwrap().value - 2.0f64 / 3.0).abs() < 1e-12);
        let k4 = g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (v, w) in [(0, 1), (2, 3), (1, 3)] {
            assert!((effective_resistance(&k4, v, w, 1e-12).unwrap().value - 0.5f64).abs() < 1e-12);
        }
        let edge = g(2, &[(0, 1)]);
        assert_eq!(effective_resistance(&edge, 0, 1, 1e-12).unwrap().value, 1.0f64);
        assert_eq!(effective_resistance(&edge, 1, 1, 1e-12).unwrap().value, 0.0f64);
    }

    #[test]
    fn disconnected_is_an_error() {
        let two = g(4, &[(0, 1), (2, 3)]);
        assert_eq!(effective_resistance::<f64>(&two, 0, 3, 1e-9), Err(ResistanceError::Disconnected));
        assert_eq!(hitting_times_exact(&two, 0).unwrap_err(), ResistanceError::Disconnected);
    }

    #[test]
    fn hitting_time_examples() {
        let p3 = g(3, &[(0, 1), (1, 2)]);
        let h = hitting_times_exact(&p3, 2).unwrap();
        assert!((h[0] - 4.0).abs() < 1e-12 && (h[1] - 3.0).abs() < 1e-12 && h[2] == 0.0);
        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        let h = hitting_times_exact(&tri, 0).unwrap();
        assert!((h[1] - 2.0).abs() < 1e-12 && (h[2] - 2.0).abs() < 1e-12);
        let exact: Vec<BigRational> = hitting_times_field(&p3, 2);
        assert_eq!(exact[0], BigRational::from_integer(4.into()));
        assert_eq!(exact[1], BigRational::from_integer(3.into()));
    }

    #[test]
    fn commute_examples() {
        let p3 = g(3, &[(0, 1), (1, 2)]);
        let c = commute_identity_check(&p3, 0, 2).unwrap();
        assert!((c.tau_vw + c.tau_wv - 8.0).abs() < 1e-12);
        assert!(c.relative_residual < 1e-12);
        // the factor-free form is off by exactly a factor two
        assert!((c.literal_relative_residual - 1.0).abs() < 1e-12);
        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        let c = commute_identity_check(&tri, 1, 2).unwrap();
        assert!((c.tau_vw + c.tau_wv - 4.0).abs() < 1e-12 && c.relative_residual < 1e-12);
    }

    #[test]
    fn large_graph_paths_agree() {
        // ring of 2500 with chords: above the dense limit
        let n = 2500;
        let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend((0..n).step_by(50).map(|i| (i, (i + n / 2 + 3) % n)));
        let gr = g(n, &edges);
        let oracle = ResistanceOracle::<f64>::new(&gr, 0).unwrap();
        for (v, w) in [(10, 1200), (5, 6), (0, 1800)] {
            let a = oracle.resistance(v, w);
            let b = effective_resistance_iterative::<f64>(&gr, v, w, 1e-11, 50_000).unwrap();
            assert!((a.value - b.value).abs() < 1e-7 * a.value, "{v},{w}: {} vs {}", a.value, b.value);
            assert!(a.residual < 1e-9);
        }
        let h = hitting_times_exact(&gr, 3).unwrap();
        assert!(h.iter().all(|&x| x >= 0.0) && h[3] == 0.0);
    }
}
