//! Pinned Gaussian free field sampling, Monte Carlo estimates of
//! `M = E max η`, and a few Gaussian comparison tools.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexId};
use crate::linalg::{DenseCholesky, Laplacian, SolveError, SparseCholesky};
use crate::scalar::Real;
use crate::seed::{replica_rng, rng_from_seed};

pub const EULER_GAMMA: f64 = 0.5772156649;
pub const DEFAULT_REPLICAS: usize = 2000;
pub const MIN_REPLICAS: usize = 100;
/// Confidence level used for the concentration radius unless overridden.
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Vertices whose variance is computed exactly when estimating `σ²`.
const VARIANCE_PROBES: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum GffError {
    #[error("factorization failed: {0}")]
    FactorizationFailed(#[from] SolveError),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("pin {0} is not a vertex")]
    BadPin(VertexId),
    #[error("at least {MIN_REPLICAS} replicas are required, got {0}")]
    TooFewReplicas(usize),
    #[error("increment domination fails at ({i}, {j}): {x} > {y}")]
    DominationViolated { i: usize, j: usize, x: f64, y: f64 },
    #[error("covariance matrix is not positive semidefinite")]
    NotPsd,
    #[error("covariance matrices must be square and of equal size")]
    Shape,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GffSample<T> {
    pub pin: VertexId,
    pub eta: Vec<T>,
    pub seed: u64,
}

impl<T: Real> GffSample<T> {
    pub fn max(&self) -> T {
        self.eta.iter().copied().fold(T::zero(), T::max)
    }
}

/// Factorization of one grounded Laplacian, reused across draws.
pub struct GffSampler<T> {
    pin: VertexId,
    lap: Laplacian<T>,
    factor: SparseCholesky<T>,
}

impl<T: Real> GffSampler<T>
where
    StandardNormal: Distribution<T>,
{
    pub fn new(g: &Graph, pin: VertexId) -> Result<Self, GffError> {
        if pin >= g.vertex_count() {
            return Err(GffError::BadPin(pin));
        }
        if !g.is_connected() {
            return Err(GffError::Disconnected);
        }
        let lap = Laplacian::<T>::grounded(g, pin);
        let factor = SparseCholesky::factor(&lap)?;
        Ok(GffSampler { pin, lap, factor })
    }

    pub fn pin(&self) -> VertexId {
        self.pin
    }

    /// `η = L⁻ᵀ z` with `z` standard normal, so `Cov η = L_g⁻¹`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut z: Vec<T> = (0..self.lap.dim()).map(|_| StandardNormal.sample(rng)).collect();
        self.factor.backward(&mut z);
        let mut eta = vec![T::zero(); self.lap.dim() + 1];
        for (i, x) in z.into_iter().enumerate() {
            eta[self.lap.vertex_of(i)] = x;
        }
        eta
    }

    pub fn sample(&self, seed: u64) -> GffSample<T> {
        GffSample { pin: self.pin, eta: self.draw(&mut rng_from_seed(seed)), seed }
    }

    /// Maximum of one replica, drawn from its own stream.
    pub fn replica_max(&self, seed: u64, replica: u64) -> T {
        let eta = self.draw(&mut replica_rng(seed, "gff", replica));
        eta.into_iter().fold(T::zero(), T::max)
    }

    /// `Var η_v = R_eff(v, pin)`.
    pub fn variance(&self, v: VertexId) -> T {
        let Some(i) = self.lap.index_of(v) else { return T::zero() };
        let mut b = vec![T::zero(); self.lap.dim()];
        b[i] = T::one();
        self.factor.solve(&mut b);
        b[i]
    }
}

pub fn sample_gff<T: Real, R: Rng + ?Sized>(g: &Graph, pin: VertexId, rng: &mut R) -> Result<GffSample<T>, GffError>
where
    StandardNormal: Distribution<T>,
{
    let seed = rng.random();
    Ok(GffSampler::<T>::new(g, pin)?.sample(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MEstimate {
    pub pin: VertexId,
    pub replicas: usize,
    pub mean: f64,
    pub se: f64,
    /// Largest `R_eff(v, pin)` among the probed vertices.
    pub sigma2: f64,
    /// Eccentricity of the pin, an upper bound on every `R_eff(v, pin)`.
    pub sigma2_bound: f64,
    pub alpha: f64,
    /// `σ √(2 ln(2/α))`.
    pub radius: f64,
    #[serde(skip)]
    pub maxima: Vec<f64>,
}

/// `√(2 ln(2/α))` times `σ`.
pub fn concentration_radius(sigma2: f64, alpha: f64) -> f64 {
    sigma2.sqrt() * (2.0 * (2.0 / alpha).ln()).sqrt()
}

/// Monte Carlo `E max η`. Replica `r` uses the stream derived from
/// `(seed, r)`, and the reduction runs in replica order, so the result does
/// not depend on the thread count.
pub fn estimate_m(g: &Graph, pin: VertexId, replicas: usize, seed: u64) -> Result<MEstimate, GffError> {
    if replicas < MIN_REPLICAS {
        return Err(GffError::TooFewReplicas(replicas));
    }
    let sampler = GffSampler::<f64>::new(g, pin)?;
    estimate_m_with(&sampler, g, replicas, seed, DEFAULT_ALPHA)
}

pub fn estimate_m_with(
    sampler: &GffSampler<f64>,
    g: &Graph,
    replicas: usize,
    seed: u64,
    alpha: f64,
) -> Result<MEstimate, GffError> {
    let maxima: Vec<f64> = (0..replicas as u64).into_par_iter().map(|r| sampler.replica_max(seed, r)).collect();
    let k = maxima.len() as f64;
    let mean = maxima.iter().sum::<f64>() / k;
    let var = maxima.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (k - 1.0);
    let se = (var / k).sqrt().max(f64::MIN_POSITIVE);

    let pin = sampler.pin();
    let dist = g.bfs_distances(&[pin])?;
    let mut probes: Vec<VertexId> = Vec::with_capacity(VARIANCE_PROBES);
    // farthest vertices first, then a deterministic random fill
    let mut by_dist: Vec<VertexId> = (0..g.vertex_count()).collect();
    by_dist.sort_by_key(|&v| (std::cmp::Reverse(dist.get(v)), v));
    probes.extend(by_dist.iter().take(VARIANCE_PROBES / 2));
    let mut rng = replica_rng(seed, "gff-probe", 0);
    for _ in 0..VARIANCE_PROBES / 2 {
        probes.push(*by_dist.choose(&mut rng).expect("nonempty graph"));
    }
    let sigma2 = probes.par_iter().map(|&v| sampler.variance(v)).collect::<Vec<_>>().into_iter().fold(0.0, f64::max);
    Ok(MEstimate {
        pin,
        replicas,
        mean,
        se,
        sigma2,
        sigma2_bound: dist.max_finite() as f64,
        alpha,
        radius: concentration_radius(sigma2, alpha),
        maxima,
    })
}

/// Asymptotic expansion of the expected maximum of `s` independent standard
/// normals.
pub fn expected_max_iid_normals(s: u64) -> f64 {
    if s <= 1 {
        return 0.0;
    }
    let l = (s as f64).ln();
    (2.0 * l).sqrt() - (l.ln() + (4.0 * std::f64::consts::PI).ln() - 2.0 * EULER_GAMMA) / (8.0 * l).sqrt()
}

/// `σ √(2 ln s)`: bounds `E max` of any centered Gaussian vector of length
/// `s` whose variances are at most `σ²`.
pub fn union_bound_max(sigma: f64, s: u64) -> f64 {
    sigma * (2.0 * (s.max(1) as f64).ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlepianReport {
    pub mean_x: f64,
    pub se_x: f64,
    pub mean_y: f64,
    pub se_y: f64,
    /// `E max X ≤ E max Y + 3 · combined SE`.
    pub holds: bool,
}

fn gaussian_factor(cov: &[Vec<f64>]) -> Result<DenseCholesky<f64>, GffError> {
    let n = cov.len();
    if cov.iter().any(|r| r.len() != n) {
        return Err(GffError::Shape);
    }
    if let Some(c) = DenseCholesky::from_rows(cov) {
        return Ok(c);
    }
    // semidefinite input: a tiny ridge keeps the factorization defined
    let ridge = 1e-12 * (0..n).map(|i| cov[i][i].abs()).fold(1.0, f64::max);
    let jittered: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| cov[i][j] + if i == j { ridge } else { 0.0 }).collect())
        .collect();
    DenseCholesky::from_rows(&jittered).ok_or(GffError::NotPsd)
}

fn mc_max<R: Rng + ?Sized>(c: &DenseCholesky<f64>, replicas: usize, rng: &mut R) -> (f64, f64) {
    let maxima: Vec<f64> = (0..replicas)
        .map(|_| {
            let z: Vec<f64> = (0..c.dim()).map(|_| StandardNormal.sample(rng)).collect();
            c.mul_lower(&z).into_iter().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let k = replicas as f64;
    let mean = maxima.iter().sum::<f64>() / k;
    let var = maxima.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Compares `E max X` and `E max Y` for centered Gaussians whose increment
/// variances satisfy `E(X_i − X_j)² ≤ E(Y_i − Y_j)²`.
pub fn slepian_check<R: Rng + ?Sized>(
    cov_x: &[Vec<f64>],
    cov_y: &[Vec<f64>],
    replicas: usize,
    rng: &mut R,
) -> Result<SlepianReport, GffError> {
    let n = cov_x.len();
    if cov_y.len() != n || replicas < 2 {
        return Err(GffError::Shape);
    }
    let cx = gaussian_factor(cov_x)?;
    let cy = gaussian_factor(cov_y)?;
    for i in 0..n {
        for j in i + 1..n {
            let x = cov_x[i][i] + cov_x[j][j] - 2.0 * cov_x[i][j];
            let y = cov_y[i][i] + cov_y[j][j] - 2.0 * cov_y[i][j];
            if x > y * (1.0 + 1e-12) + 1e-12 {
                return Err(GffError::DominationViolated { i, j, x, y });
            }
        }
    }
    let (mean_x, se_x) = mc_max(&cx, replicas, rng);
    let (mean_y, se_y) = mc_max(&cy, replicas, rng);
    let holds = mean_x <= mean_y + 3.0 * (se_x * se_x + se_y * se_y).sqrt();
    Ok(SlepianReport { mean_x, se_x, mean_y, se_y, holds })
}
