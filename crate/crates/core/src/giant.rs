//! The three-step emerging-giant construction `H`:
//!
//! 1. a kernel `K1`, uniform among simple graphs with a Poisson degree
//!    census restricted to degrees `>= 3`;
//! 2. `K2`, every kernel edge replaced by a path of Geom(1−μ) length;
//! 3. an independent Poisson(μ) Galton–Watson tree rooted at every vertex
//!    of `K2`.
//!
//! Vertex ids of a [`GiantSample`] are laid out as kernel vertices
//! `[0, k1)`, then subdivision vertices `[k1, k2)`, then tree vertices
//! `[k2, |V|)`.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal, Poisson};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError, Role, VertexId};
use crate::gw::{self, CensusConstants, DepthCensus, GwTree};
use crate::seed::rng_from_seed;

pub const MIN_RECOMMENDED_N: f64 = 64.0;
pub const PARITY_ATTEMPTS: usize = 10_000;
pub const PAIRING_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("parity condition not met after {0} attempts")]
    RngExhausted(usize),
    #[error("no simple realization found after {0} pairings")]
    PairingBudgetExceeded(usize),
    #[error("degree sequence is not graphical: {0}")]
    InfeasibleDegreeSequence(String),
    #[error("kernel has {0} vertices; at least 4 are needed")]
    KernelTooSmall(usize),
    #[error("provenance: {0}")]
    Provenance(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Solves `μ e^{-μ} = (1+ε) e^{-(1+ε)}` for `μ ∈ (0, 1)` by bisection.
pub fn solve_mu(eps: f64) -> Result<f64, ModelError> {
    if !(eps > 0.0) {
        return Err(ModelError::NonPositiveEpsilon(eps));
    }
    let target = (1.0 + eps) * (-(1.0 + eps)).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid * (-mid).exp() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub n: u64,
    pub eps: f64,
    pub mu: f64,
    /// `ε³ n`.
    pub big_n: f64,
}

impl ModelParams {
    pub fn new(n: u64, eps: f64) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::InvalidParams("n must be positive".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ModelError::InvalidParams(format!("epsilon {eps} outside (0, 1)")));
        }
        let mu = solve_mu(eps)?;
        Ok(ModelParams { n, eps, mu, big_n: eps.powi(3) * n as f64 })
    }

    /// Parameters with an explicit conjugate mean, for degenerate checks
    /// (e.g. `μ = 0`: no subdivision and no trees).
    pub fn with_mu(n: u64, eps: f64, mu: f64) -> Result<Self, ModelError> {
        let mut p = Self::new(n, eps)?;
        if !(0.0..1.0).contains(&mu) {
            return Err(ModelError::InvalidParams(format!("mu {mu} outside [0, 1)")));
        }
        p.mu = mu;
        Ok(p)
    }

    /// Parameters for a target `N = ε³ n`.
    pub fn for_big_n(big_n: f64, eps: f64) -> Result<Self, ModelError> {
        let n = (big_n / eps.powi(3)).round() as u64;
        Self::new(n, eps)
    }

    pub fn mu_residual(&self) -> f64 {
        (self.mu * (-self.mu).exp() - (1.0 + self.eps) * (-(1.0 + self.eps)).exp()).abs()
    }

    /// Hard cap on attached-tree depth, `ceil(10 ln N / ε)`.
    pub fn depth_cap(&self) -> u32 {
        (10.0 * self.big_n.ln() / self.eps).ceil().max(1.0) as u32
    }

    /// Mean Poisson rate of step 1, `1 + ε − μ`.
    pub fn lambda_mean(&self) -> f64 {
        1.0 + self.eps - self.mu
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSample {
    pub lambda: f64,
    /// Draws of Λ rejected for being non-positive.
    pub lambda_redraws: usize,
    #[serde(skip)]
    pub degrees: Vec<u32>,
    /// `census[k] = #{u : D_u = k}`.
    pub census: Vec<u64>,
    pub n_ge3: usize,
    pub resample_count: usize,
}

impl DegreeSample {
    /// Degrees `>= 3` in vertex order: the kernel degree sequence.
    pub fn kernel_degrees(&self) -> Vec<u32> {
        self.degrees.iter().copied().filter(|&d| d >= 3).collect()
    }

    pub fn restricted_sum(&self) -> u64 {
        self.degrees.iter().filter(|&&d| d >= 3).map(|&d| d as u64).sum()
    }
}

/// Step 1 degrees: Λ ~ Normal(1+ε−μ, 1/(εn)) redrawn while non-positive,
/// then i.i.d. Poisson(Λ) degrees resampled until `Σ D_u 1{D_u≥3}` is even.
pub fn sample_degrees<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<DegreeSample, ModelError> {
    let sd = 1.0 / (params.eps * params.n as f64).sqrt();
    let normal = Normal::new(params.lambda_mean(), sd).map_err(|e| ModelError::InvalidParams(e.to_string()))?;
    let mut lambda_redraws = 0;
    let lambda = loop {
        let x: f64 = normal.sample(rng);
        if x > 0.0 {
            break x;
        }
        lambda_redraws += 1;
    };
    let poisson = Poisson::new(lambda).map_err(|e| ModelError::InvalidParams(e.to_string()))?;
    let n = params.n as usize;
    let mut degrees = vec![0u32; n];
    for attempt in 0..PARITY_ATTEMPTS {
        let mut odd = false;
        for d in degrees.iter_mut() {
            *d = poisson.sample(rng) as u32;
            if *d >= 3 && *d % 2 == 1 {
                odd = !odd;
            }
        }
        if !odd {
            let max = degrees.iter().copied().max().unwrap_or(0) as usize;
            let mut census = vec![0u64; max + 1];
            for &d in &degrees {
                census[d as usize] += 1;
            }
            let n_ge3 = census.iter().skip(3).sum::<u64>() as usize;
            return Ok(DegreeSample { lambda, lambda_redraws, degrees, census, n_ge3, resample_count: attempt });
        }
    }
    Err(ModelError::RngExhausted(PARITY_ATTEMPTS))
}

/// Erdős–Gallai test.
pub fn check_graphical(degrees: &[u32]) -> Result<(), ModelError> {
    let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
    if sum % 2 == 1 {
        return Err(ModelError::InfeasibleDegreeSequence(format!("odd degree sum {sum}")));
    }
    let mut d: Vec<u64> = degrees.iter().map(|&x| x as u64).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let n = d.len();
    let mut suffix = vec![0u64; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + d[i];
    }
    let mut prefix = 0u64;
    for k in 1..=n {
        prefix += d[k - 1];
        let kk = k as u64;
        // first index >= k with d[i] < k
        let j = k + d[k..].partition_point(|&x| x >= kk);
        let rhs = kk * (kk - 1) + kk * (j - k) as u64 + suffix[j];
        if prefix > rhs {
            return Err(ModelError::InfeasibleDegreeSequence(format!("Erdős–Gallai fails at k={k}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    pub graph: Graph,
    pub degrees: Vec<u32>,
    /// Pairings drawn, including the accepted one.
    pub attempts: usize,
}

/// Configuration-model pairing, rejected wholesale until simple and
/// connected. The accepted pairing is uniform over simple connected
/// realizations of `degrees`.
pub fn sample_configuration<R: Rng + ?Sized>(
    degrees: &[u32],
    role: Role,
    budget: usize,
    rng: &mut R,
) -> Result<KernelSample, ModelError> {
    check_graphical(degrees)?;
    let n = degrees.len();
    let mut stubs: Vec<VertexId> = Vec::with_capacity(degrees.iter().map(|&d| d as usize).sum());
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v, d as usize));
    }
    let mut seen = std::collections::HashSet::with_capacity(stubs.len() / 2);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for attempt in 1..=budget {
        stubs.shuffle(rng);
        seen.clear();
        edges.clear();
        let mut simple = true;
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                simple = false;
                break;
            }
            edges.push((u, v));
        }
        if !simple {
            continue;
        }
        let graph = Graph::build(&edges, vec![role; n])?;
        if graph.is_connected() {
            return Ok(KernelSample { graph, degrees: degrees.to_vec(), attempts: attempt });
        }
    }
    Err(ModelError::PairingBudgetExceeded(budget))
}

/// Step 1 kernel on the vertices of degree at least three.
pub fn sample_kernel<R: Rng + ?Sized>(ds: &DegreeSample, rng: &mut R) -> Result<KernelSample, ModelError> {
    let degrees = ds.kernel_degrees();
    if degrees.len() < 4 {
        return Err(ModelError::KernelTooSmall(degrees.len()));
    }
    sample_configuration(&degrees, Role::Kernel, PAIRING_BUDGET, rng)
}

/// One subdivided kernel edge. `internal` runs from `ends.0` to `ends.1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathRecord {
    pub ends: (VertexId, VertexId),
    pub length: usize,
    pub internal: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subdivision {
    pub graph: Graph,
    pub kernel_count: usize,
    pub paths: Vec<PathRecord>,
    /// Paths longer than `(2/ε) ln |K1|`.
    pub long_paths: usize,
}

/// Step 2: every kernel edge becomes a path of length `1 + Geometric(1−μ)`
/// (support `{1, 2, ...}`, mean `1/(1−μ)`).
pub fn subdivide<R: Rng + ?Sized>(k1: &Graph, mu: f64, eps: f64, rng: &mut R) -> Result<Subdivision, ModelError> {
    let geo = Geometric::new(1.0 - mu).map_err(|e| ModelError::InvalidParams(e.to_string()))?;
    let k = k1.vertex_count();
    let long_limit = 2.0 / eps * (k as f64).ln();
    let mut next = k;
    let mut edges = Vec::with_capacity(k1.edge_count());
    let mut paths = Vec::with_capacity(k1.edge_count());
    let mut long_paths = 0;
    for (a, b) in k1.edges() {
        let length = 1 + geo.sample(rng) as usize;
        if length as f64 > long_limit {
            long_paths += 1;
        }
        let internal: Vec<VertexId> = (next..next + length - 1).collect();
        next += length - 1;
        let mut prev = a;
        for &v in &internal {
            edges.push((prev, v));
            prev = v;
        }
        edges.push((prev, b));
        paths.push(PathRecord { ends: (a, b), length, internal });
    }
    let mut roles = vec![Role::Kernel; k];
    roles.resize(next, Role::Path);
    let graph = Graph::build(&edges, roles)?;
    Ok(Subdivision { graph, kernel_count: k, paths, long_paths })
}

/// Summary of the tree rooted at one `K2` vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeRecord {
    pub depth_max: u32,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiantSample {
    pub params: ModelParams,
    pub seed: u64,
    /// `H`.
    pub graph: Graph,
    pub kernel_count: usize,
    pub k2_count: usize,
    pub paths: Vec<PathRecord>,
    /// Tree parent of every vertex outside `K2`.
    pub parent: Vec<Option<VertexId>>,
    /// Distance to `K2`.
    pub depth: Vec<u32>,
    /// Root (a `K2` vertex) of the tree containing each vertex.
    pub root: Vec<VertexId>,
    /// Indexed by `K2` vertex.
    pub trees: Vec<TreeRecord>,
    pub depth_cap: u32,
    pub cap_hits: usize,
    pub stats: SampleStats,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleStats {
    pub lambda: f64,
    pub lambda_redraws: usize,
    pub parity_resamples: usize,
    pub pairing_attempts: usize,
    pub kernel_degree3_fraction: f64,
    pub long_paths: usize,
}

impl GiantSample {
    pub fn kernel_vertices(&self) -> std::ops::Range<VertexId> {
        0..self.kernel_count
    }

    pub fn k2_vertices(&self) -> std::ops::Range<VertexId> {
        0..self.k2_count
    }

    pub fn in_k2(&self, v: VertexId) -> bool {
        v < self.k2_count
    }

    pub fn kernel_edge_count(&self) -> usize {
        self.paths.len()
    }

    pub fn k2_edge_count(&self) -> usize {
        self.paths.iter().map(|p| p.length).sum()
    }

    pub fn tree_vertex_count(&self) -> usize {
        self.graph.vertex_count() - self.k2_count
    }

    /// `K2` as a standalone graph (ids unchanged).
    pub fn k2_graph(&self) -> Graph {
        self.graph.induced(&(0..self.k2_count).collect::<Vec<_>>()).0
    }

    /// Writes the `#giantwalk-prov v1` sidecar.
    ///
    /// `P <vertex> <parent|-> <role> <record>` where the record is the path
    /// index for subdivision vertices, the root for tree vertices and `-`
    /// for kernel vertices; `R <index> <a> <b> <length>` lists every path.
    pub fn write_provenance<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let p = &self.params;
        writeln!(
            out,
            "#giantwalk-prov v1 n={} eps={} mu={} seed={} k1={} k2={} cap={} cap_hits={}",
            p.n, p.eps, p.mu, self.seed, self.kernel_count, self.k2_count, self.depth_cap, self.cap_hits
        )?;
        let mut path_of = vec![usize::MAX; self.k2_count];
        for (i, rec) in self.paths.iter().enumerate() {
            for &v in &rec.internal {
                path_of[v] = i;
            }
        }
        for v in 0..self.graph.vertex_count() {
            let parent = self.parent[v].map_or("-".to_string(), |x| x.to_string());
            let record = match self.graph.role(v) {
                Role::Kernel => "-".to_string(),
                Role::Path => path_of[v].to_string(),
                Role::Tree => self.root[v].to_string(),
            };
            writeln!(out, "P {v} {parent} {} {record}", self.graph.role(v))?;
        }
        for (i, rec) in self.paths.iter().enumerate() {
            writeln!(out, "R {i} {} {} {}", rec.ends.0, rec.ends.1, rec.length)?;
        }
        Ok(())
    }

    pub fn provenance_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_provenance(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Rebuilds a sample from its graph file and provenance sidecar.
    pub fn from_parts<R: BufRead>(graph: Graph, prov: R) -> Result<Self, ModelError> {
        let bad = |msg: &str| ModelError::Provenance(msg.to_string());
        let mut lines = prov.lines();
        let header = lines.next().ok_or_else(|| bad("empty provenance"))?.map_err(GraphError::from)?;
        let mut tok = header.split_whitespace();
        if tok.next() != Some("#giantwalk-prov") || tok.next() != Some("v1") {
            return Err(bad("bad header"));
        }
        let mut kv = std::collections::HashMap::new();
        for t in tok {
            let (k, v) = t.split_once('=').ok_or_else(|| bad("bad header field"))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| kv.get(k).ok_or_else(|| bad(&format!("missing header field {k}")));
        let num = |k: &str| -> Result<f64, ModelError> { get(k)?.parse().map_err(|_| bad(k)) };
        let n = num("n")? as u64;
        let eps = num("eps")?;
        let mu = num("mu")?;
        let params = ModelParams::with_mu(n, eps, mu)?;
        let seed: u64 = get("seed")?.parse().map_err(|_| bad("seed"))?;
        let kernel_count = num("k1")? as usize;
        let k2_count = num("k2")? as usize;
        let depth_cap = num("cap")? as u32;
        let cap_hits = num("cap_hits")? as usize;

        let nv = graph.vertex_count();
        let mut parent = vec![None; nv];
        let mut seen = vec![false; nv];
        let mut paths: Vec<PathRecord> = Vec::new();
        let mut members: Vec<Vec<VertexId>> = Vec::new();
        for line in lines {
            let line = line.map_err(GraphError::from)?;
            let t: Vec<&str> = line.split_whitespace().collect();
            match t.first() {
                Some(&"P") if t.len() == 5 => {
                    let v: usize = t[1].parse().map_err(|_| bad("vertex id"))?;
                    if v >= nv {
                        return Err(bad("vertex id out of range"));
                    }
                    seen[v] = true;
                    if t[2] != "-" {
                        parent[v] = Some(t[2].parse().map_err(|_| bad("parent id"))?);
                    }
                    let role: Role = t[3].parse().map_err(|e: String| bad(&e))?;
                    if role != graph.role(v) {
                        return Err(bad("role disagrees with graph"));
                    }
                    if role == Role::Path {
                        let r: usize = t[4].parse().map_err(|_| bad("record id"))?;
                        if members.len() <= r {
                            members.resize(r + 1, Vec::new());
                        }
                        members[r].push(v);
                    }
                }
                Some(&"R") if t.len() == 5 => {
                    let f: Vec<usize> = t[1..].iter().map(|x| x.parse().map_err(|_| bad("path record"))).collect::<Result<_, _>>()?;
                    if f[0] != paths.len() {
                        return Err(bad("path records out of order"));
                    }
                    paths.push(PathRecord { ends: (f[1], f[2]), length: f[3], internal: Vec::new() });
                }
                None => {}
                _ => return Err(bad("unknown record")),
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(bad("vertex without provenance"));
        }
        members.resize(paths.len(), Vec::new());
        for (rec, mut m) in paths.iter_mut().zip(members) {
            // internal vertices were allocated consecutively from ends.0
            m.sort_unstable();
            if m.len() + 1 != rec.length {
                return Err(bad("path length disagrees with members"));
            }
            rec.internal = m;
        }
        let mut depth = vec![0u32; nv];
        let mut root: Vec<VertexId> = (0..nv).collect();
        for v in k2_count..nv {
            let p = parent[v].ok_or_else(|| bad("tree vertex without parent"))?;
            if p >= v {
                return Err(bad("tree parents must precede children"));
            }
            depth[v] = depth[p] + 1;
            root[v] = root[p];
        }
        let mut trees = vec![TreeRecord { depth_max: 0, size: 1 }; k2_count];
        for v in k2_count..nv {
            let t = &mut trees[root[v]];
            t.depth_max = t.depth_max.max(depth[v]);
            t.size += 1;
        }
        Ok(GiantSample {
            params,
            seed,
            graph,
            kernel_count,
            k2_count,
            paths,
            parent,
            depth,
            root,
            trees,
            depth_cap,
            cap_hits,
            stats: SampleStats::default(),
            warnings: Vec::new(),
        })
    }
}

/// Step 3: a PGW(μ) tree whose root is identified with each `K2` vertex.
pub fn attach_trees<R: Rng + ?Sized>(
    sub: Subdivision,
    params: &ModelParams,
    seed: u64,
    rng: &mut R,
) -> Result<GiantSample, ModelError> {
    let k2 = sub.graph.vertex_count();
    let cap = params.depth_cap();
    let law = gw::offspring(params.mu);
    let mut edges: Vec<(VertexId, VertexId)> = sub.graph.edges().collect();
    let mut roles = sub.graph.roles().to_vec();
    let mut parent = vec![None; k2];
    let mut depth = vec![0u32; k2];
    let mut root: Vec<VertexId> = (0..k2).collect();
    let mut trees = Vec::with_capacity(k2);
    let mut cap_hits = 0;
    let mut tree = GwTree { parent: vec![None], depth: vec![0], depth_max: 0, truncated: false };
    for r in 0..k2 {
        tree.parent.truncate(1);
        tree.depth.truncate(1);
        tree.depth_max = 0;
        tree.truncated = false;
        gw::grow(&mut tree, law.as_ref(), cap, rng);
        if tree.truncated {
            cap_hits += 1;
        }
        let base = roles.len();
        // local id i > 0 maps to base + i - 1; local 0 is r
        let global = |i: usize| if i == 0 { r } else { base + i - 1 };
        for i in 1..tree.size() {
            let p = global(tree.parent[i].expect("non-root"));
            edges.push((p, global(i)));
            roles.push(Role::Tree);
            parent.push(Some(p));
            depth.push(tree.depth[i]);
            root.push(r);
        }
        trees.push(TreeRecord { depth_max: tree.depth_max, size: tree.size() });
    }
    let graph = Graph::build(&edges, roles)?;
    let mut warnings = Vec::new();
    if cap_hits > 0 {
        warnings.push(format!("{cap_hits} trees hit the depth cap {cap}"));
    }
    if sub.long_paths > 0 {
        warnings.push(format!("{} subdivided paths exceed (2/eps) ln |K1|", sub.long_paths));
    }
    Ok(GiantSample {
        params: *params,
        seed,
        graph,
        kernel_count: sub.kernel_count,
        k2_count: k2,
        paths: sub.paths,
        parent,
        depth,
        root,
        trees,
        depth_cap: cap,
        cap_hits,
        stats: SampleStats { long_paths: sub.long_paths, ..Default::default() },
        warnings,
    })
}

/// Steps 1–3 as a deterministic function of `(params, seed)`.
pub fn sample_giant(params: &ModelParams, seed: u64) -> Result<GiantSample, ModelError> {
    let mut rng = rng_from_seed(seed);
    let ds = sample_degrees(params, &mut rng)?;
    let kernel = sample_kernel(&ds, &mut rng)?;
    let deg3 = kernel.degrees.iter().filter(|&&d| d == 3).count() as f64 / kernel.degrees.len() as f64;
    let sub = subdivide(&kernel.graph, params.mu, params.eps, &mut rng)?;
    let mut gs = attach_trees(sub, params, seed, &mut rng)?;
    if params.big_n < MIN_RECOMMENDED_N {
        gs.warnings.insert(
            0,
            format!("N = eps^3 n = {:.3} is below {MIN_RECOMMENDED_N}; asymptotic statements are unreliable", params.big_n),
        );
    }
    gs.stats.lambda = ds.lambda;
    gs.stats.lambda_redraws = ds.lambda_redraws;
    gs.stats.parity_resamples = ds.resample_count;
    gs.stats.pairing_attempts = kernel.attempts;
    gs.stats.kernel_degree3_fraction = deg3;
    if !gs.graph.is_connected() {
        return Err(ModelError::Graph(GraphError::Disconnected));
    }
    Ok(gs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratio {
    pub measured: f64,
    pub target: f64,
    pub ratio: f64,
}

impl Ratio {
    fn new(measured: f64, target: f64) -> Self {
        Ratio { measured, target, ratio: measured / target }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSummary {
    pub census: DepthCensus,
    pub max_depth: u32,
    pub depth_ceiling: f64,
    pub trees_exceeding_ceiling: usize,
}

/// Measured sizes against the assumed asymptotic sizes of `H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApohReport {
    pub k1_vertices: Ratio,
    pub k1_edges: Ratio,
    pub k2_vertices: Ratio,
    pub k2_edges: Ratio,
    pub h_vertices: Ratio,
    pub h_edges: Ratio,
    /// `None` when no tree has a non-root vertex.
    pub trees: Option<TreeSummary>,
}

impl ApohReport {
    pub fn size_ratios(&self) -> [(&'static str, Ratio); 6] {
        [
            ("k1_vertices", self.k1_vertices),
            ("k1_edges", self.k1_edges),
            ("k2_vertices", self.k2_vertices),
            ("k2_edges", self.k2_edges),
            ("h_vertices", self.h_vertices),
            ("h_edges", self.h_edges),
        ]
    }
}

pub fn apoh_report(gs: &GiantSample, gamma: f64, consts: &CensusConstants) -> ApohReport {
    let p = &gs.params;
    let n = p.n as f64;
    let big_n = p.big_n;
    let trees = (gs.tree_vertex_count() > 0).then(|| {
        let census = gw::depth_census(gs, gamma, consts).expect("gamma validated by caller");
        let ceiling = gw::depth_ceiling(gs);
        TreeSummary {
            census,
            max_depth: ceiling.max_depth,
            depth_ceiling: ceiling.ceiling,
            trees_exceeding_ceiling: ceiling.trees_exceeding,
        }
    });
    ApohReport {
        k1_vertices: Ratio::new(gs.kernel_count as f64, 4.0 * big_n / 3.0),
        k1_edges: Ratio::new(gs.kernel_edge_count() as f64, 2.0 * big_n),
        k2_vertices: Ratio::new(gs.k2_count as f64, 2.0 * p.eps * p.eps * n),
        k2_edges: Ratio::new(gs.k2_edge_count() as f64, 2.0 * p.eps * p.eps * n),
        h_vertices: Ratio::new(gs.graph.vertex_count() as f64, 2.0 * p.eps * n),
        h_edges: Ratio::new(gs.graph.edge_count() as f64, 2.0 * p.eps * n),
        trees,
    }
}
