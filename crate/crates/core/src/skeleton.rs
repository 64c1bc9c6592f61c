//! The dyadic hierarchy over the attached trees (survivors, `U^j`, `W_k`,
//! the pairings `J_i`), per-vertex chains with their level budgets, and the
//! dyadic pairs `I_i` inside `K2`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::giant::{GiantSample, ModelParams};
use crate::graph::{GraphError, VertexId};

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum SkeletonError {
    #[error("sample lacks tree provenance: {0}")]
    MissingProvenance(String),
    #[error("chain from {0} got stuck at {1}")]
    RecursionStuck(VertexId, VertexId),
    #[error("{0} chain budget violations")]
    BudgetViolation(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Smallest power of two that is at least `1/ε`.
pub fn kappa(eps: f64) -> u32 {
    let target = 1.0 / eps;
    let mut k = 1u32;
    while (k as f64) < target * (1.0 - 1e-12) {
        k *= 2;
    }
    k
}

#[derive(Debug, Clone)]
pub struct SkeletonHierarchy {
    pub kappa: u32,
    pub l0: u32,
    /// Distance to `K2` (the index of the level `L_k` holding each vertex).
    pub depth: Vec<u32>,
    /// Tree parent; `NONE` on `K2`.
    parent: Vec<u32>,
    /// Longest downward distance inside the subtree of each vertex.
    pub height: Vec<u32>,
    /// Bit `i` set iff the vertex is in `π2(J_i)`.
    pub member: Vec<u64>,
    /// For `v` with `φ(v) = i < ℓ0`, off `W_{2^{i+1}}`: the vertex `x(v)`
    /// paired in `J_{i+1}` with its `2^{i+1}`-ancestor.
    x: Vec<u32>,
    /// `U^0 = K2`, then `U^1 ...`; the last level absorbs anything deeper.
    pub u: Vec<Vec<VertexId>>,
    /// Vertices deeper than the last `U` level that were folded into it.
    pub u_overflow: usize,
    /// `|W_k|` for `k = 1, 2, 4, ..., κ`.
    pub w_sizes: Vec<(u32, usize)>,
    pub k2_count: usize,
}

impl SkeletonHierarchy {
    pub fn vertex_count(&self) -> usize {
        self.depth.len()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        (self.parent[v] != NONE).then(|| self.parent[v] as usize)
    }

    pub fn in_k2(&self, v: VertexId) -> bool {
        self.depth[v] == 0
    }

    /// Ancestor `k` levels up, if the tree is that deep above `v`.
    pub fn ancestor(&self, mut v: VertexId, k: u32) -> Option<VertexId> {
        if k > self.depth[v] {
            return None;
        }
        for _ in 0..k {
            v = self.parent[v] as usize;
        }
        Some(v)
    }

    /// `max {i ≤ ℓ0 : v ∈ W_{2^i}}`.
    pub fn phi(&self, v: VertexId) -> u32 {
        let d = self.depth[v];
        if d == 0 {
            self.l0
        } else {
            d.trailing_zeros().min(self.l0)
        }
    }

    /// `max {i ≤ φ(v) : v ∈ π2(J_i)}`; `None` when there is no such `i`
    /// (only on `K2`).
    pub fn psi(&self, v: VertexId) -> Option<u32> {
        let phi = self.phi(v);
        let mask = if phi >= 63 { u64::MAX } else { (1u64 << (phi + 1)) - 1 };
        let m = self.member[v] & mask;
        (m != 0).then(|| 63 - m.leading_zeros())
    }

    pub fn in_w(&self, v: VertexId, k: u32) -> bool {
        self.depth[v] % k == 0
    }

    /// `J_i` as `(ancestor, descendant)` pairs, ordered by descendant id.
    pub fn pairs(&self, i: u32) -> Vec<(VertexId, VertexId)> {
        (0..self.vertex_count())
            .filter(|&v| self.member[v] >> i & 1 == 1)
            .map(|v| (self.ancestor(v, 1 << i).expect("A: descendant depth"), v))
            .collect()
    }

    pub fn j_sizes(&self) -> Vec<usize> {
        (0..=self.l0).map(|i| self.member.iter().filter(|&&m| m >> i & 1 == 1).count()).collect()
    }

    pub fn x_of(&self, v: VertexId) -> Option<VertexId> {
        (self.x[v] != NONE).then(|| self.x[v] as usize)
    }

    /// Nearest ancestor in `W_κ`: `v` itself on `K2` and off `W_κ`'s tree
    /// part, the `κ`-ancestor for tree vertices of `W_κ`.
    pub fn alpha(&self, v: VertexId) -> VertexId {
        let d = self.depth[v];
        if d == 0 {
            return v;
        }
        let r = d % self.kappa;
        let up = if r == 0 { self.kappa } else { r };
        self.ancestor(v, up).expect("depth bounds the ascent")
    }
}

/// Builds the hierarchy of `gs`. Ties in descendant choices go to the
/// lowest vertex id.
pub fn build_hierarchy(gs: &GiantSample) -> Result<SkeletonHierarchy, SkeletonError> {
    let n = gs.graph.vertex_count();
    if gs.parent.len() != n || gs.depth.len() != n {
        return Err(SkeletonError::MissingProvenance(format!(
            "{} parents and {} depths for {n} vertices",
            gs.parent.len(),
            gs.depth.len()
        )));
    }
    let kappa = kappa(gs.params.eps);
    let l0 = kappa.trailing_zeros();
    let depth = gs.depth.clone();
    let parent: Vec<u32> = gs.parent.iter().map(|p| p.map_or(NONE, |p| p as u32)).collect();
    for v in 0..n {
        let ok = match gs.parent[v] {
            None => depth[v] == 0,
            Some(p) => depth[v] == depth[p] + 1 && gs.graph.has_edge(p, v),
        };
        if !ok {
            return Err(SkeletonError::MissingProvenance(format!("inconsistent parent record at {v}")));
        }
    }

    let mut order: Vec<VertexId> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(depth[v]));
    let mut height = vec![0u32; n];
    for &v in &order {
        if parent[v] != NONE {
            let p = parent[v] as usize;
            height[p] = height[p].max(height[v] + 1);
        }
    }

    let mut h = SkeletonHierarchy {
        kappa,
        l0,
        depth,
        parent,
        height,
        member: vec![0; n],
        x: vec![NONE; n],
        u: Vec::new(),
        u_overflow: 0,
        w_sizes: Vec::new(),
        k2_count: gs.k2_count,
    };

    // J_0: every tree edge, keyed by its child
    for v in 0..n {
        if h.parent[v] != NONE {
            h.member[v] |= 1;
        }
    }
    // J_{i+1} from J_i: each v0 with φ = i off W_{2^{i+1}} picks the lowest
    // z with (v0, z) ∈ J_i, which is then paired with its 2^{i+1}-ancestor
    for i in 0..l0 {
        let step = 1u32 << i;
        for z in 0..n {
            if h.member[z] >> i & 1 == 0 {
                continue;
            }
            let v0 = h.ancestor(z, step).expect("A holds for J_i");
            if h.depth[v0] == 0 || h.depth[v0].trailing_zeros() != i {
                continue;
            }
            if h.x[v0] == NONE || (z as u32) < h.x[v0] {
                h.x[v0] = z as u32;
            }
        }
        for v0 in 0..n {
            if h.x[v0] != NONE && h.depth[v0] != 0 && h.depth[v0].trailing_zeros() == i {
                h.member[h.x[v0] as usize] |= 1 << (i + 1);
            }
        }
    }

    // U^j: the lowest-id κ-descendant of each κ-survivor in L_{(j−1)κ}
    let j_max = (2.0 * gs.params.big_n.ln()).ceil().max(1.0) as usize;
    let mut chosen = vec![NONE; n];
    for v in 0..n {
        let d = h.depth[v];
        if d >= kappa && d % kappa == 0 {
            let a = h.ancestor(v, kappa).expect("deep enough");
            if chosen[a] == NONE || (v as u32) < chosen[a] {
                chosen[a] = v as u32;
            }
        }
    }
    let mut u = vec![Vec::new(); j_max + 1];
    u[0] = (0..gs.k2_count).collect();
    for &c in chosen.iter().filter(|&&c| c != NONE) {
        let j = (h.depth[c as usize] / kappa) as usize;
        if j > j_max {
            h.u_overflow += 1;
        }
        u[j.min(j_max)].push(c as usize);
    }
    for level in u.iter_mut() {
        level.sort_unstable();
    }
    h.u = u;
    h.w_sizes = (0..=l0).map(|i| (1u32 << i, (0..n).filter(|&v| h.depth[v] % (1 << i) == 0).count())).collect();
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub a_violations: usize,
    pub b_violations: usize,
    pub c_violations: usize,
    pub d_violations: usize,
    pub w_nesting_violations: usize,
    pub u_violations: usize,
    pub alpha_violations: usize,
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.a_violations
            + self.b_violations
            + self.c_violations
            + self.d_violations
            + self.w_nesting_violations
            + self.u_violations
            + self.alpha_violations
            == 0
    }
}

/// Re-checks Properties A–D, the `W_k` nesting and the `U^j` definition
/// from the raw sample (BFS levels and parent records), not from the
/// builder's bookkeeping.
pub fn validate_hierarchy(gs: &GiantSample, h: &SkeletonHierarchy) -> Result<PropertyReport, SkeletonError> {
    let g = &gs.graph;
    let n = g.vertex_count();
    let k2: Vec<VertexId> = gs.k2_vertices().collect();
    let levels = g.bfs_distances(&k2)?;
    let dist = |v: VertexId| levels.get(v).expect("H is connected") as u32;
    let anc = |mut v: VertexId, k: u32| -> Option<VertexId> {
        for _ in 0..k {
            v = gs.parent[v]?;
        }
        Some(v)
    };
    // subtree height recomputed from parent walks
    let mut height = vec![0u32; n];
    for v in 0..n {
        let mut w = v;
        let mut up = 0;
        while let Some(p) = gs.parent[w] {
            up += 1;
            height[p] = height[p].max(up);
            w = p;
        }
    }
    let sets: Vec<HashSet<(VertexId, VertexId)>> = (0..=h.l0).map(|i| h.pairs(i).into_iter().collect()).collect();
    let mut r = PropertyReport {
        a_violations: 0,
        b_violations: 0,
        c_violations: 0,
        d_violations: 0,
        w_nesting_violations: 0,
        u_violations: 0,
        alpha_violations: 0,
    };

    // A
    for (i, s) in sets.iter().enumerate() {
        let k = 1u32 << i;
        for &(v1, v2) in s {
            let ok = dist(v1) % k == 0 && dist(v2) % k == 0 && dist(v2) == dist(v1) + k && anc(v2, k) == Some(v1);
            r.a_violations += usize::from(!ok);
        }
    }
    // B
    let outside: HashSet<(VertexId, VertexId)> = g
        .edges()
        .filter(|&(a, b)| !(gs.in_k2(a) && gs.in_k2(b)))
        .map(|(a, b)| if dist(a) < dist(b) { (a, b) } else { (b, a) })
        .collect();
    r.b_violations = outside.symmetric_difference(&sets[0]).count();
    // C
    for i in 0..h.l0 {
        let k = 1u32 << i;
        let mut hits = vec![0usize; n];
        for &(_, x) in &sets[i as usize + 1] {
            if let Some(v0) = anc(x, k) {
                hits[v0] += 1;
            }
        }
        for v0 in 0..n {
            let d = dist(v0);
            let off = d % k == 0 && d % (2 * k) != 0;
            let survivor = height[v0] >= k;
            let want = usize::from(off && survivor);
            r.c_violations += usize::from(hits[v0] != want);
        }
    }
    // D
    for i in 0..h.l0 as usize {
        let lower: HashSet<VertexId> = sets[i].iter().map(|&(_, b)| b).collect();
        r.d_violations += sets[i + 1].iter().filter(|(_, b)| !lower.contains(b)).count();
    }
    // W nesting and sizes
    let mut prev: Option<usize> = None;
    for &(k, size) in &h.w_sizes {
        let count = (0..n).filter(|&v| dist(v) % k == 0).count();
        r.w_nesting_violations += usize::from(count != size);
        if let Some(p) = prev {
            r.w_nesting_violations += usize::from(size > p);
        }
        prev = Some(size);
    }
    // U
    let kappa = h.kappa;
    let last = h.u.len() - 1;
    let mut want_u: Vec<Vec<VertexId>> = vec![Vec::new(); h.u.len()];
    want_u[0] = k2.clone();
    let mut pick: Vec<Option<VertexId>> = vec![None; n];
    for w in (0..n).rev() {
        let d = dist(w);
        if d >= kappa && d % kappa == 0 {
            pick[anc(w, kappa).expect("tree vertex")] = Some(w);
        }
    }
    for v in 0..n {
        if let Some(w) = pick[v] {
            r.u_violations += usize::from(height[v] < kappa);
            want_u[((dist(v) / kappa) as usize + 1).min(last)].push(w);
        }
    }
    for (have, want) in h.u.iter().zip(want_u.iter_mut()) {
        want.sort_unstable();
        r.u_violations += usize::from(have != want);
    }
    // α against an independent parent walk
    for v in 0..n {
        let mut w = v;
        if dist(v) > 0 {
            w = gs.parent[w].expect("tree vertex");
            while dist(w) % kappa != 0 {
                w = gs.parent[w].expect("K2 ends every ascent");
            }
        }
        r.alpha_violations += usize::from(h.alpha(v) != w);
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainDecomposition {
    pub vertex: VertexId,
    /// `v = v_0, ..., v_t = α(v)`.
    pub chain: Vec<VertexId>,
    /// Level `i` of each link `{v_{s−1}, v_s}` in `J̄_i`.
    pub link_levels: Vec<u32>,
    /// `m_i` for `i = 0..=ℓ0`.
    pub counts: Vec<u32>,
}

impl ChainDecomposition {
    pub fn within_budget(&self, l0: u32) -> bool {
        self.counts.iter().enumerate().all(|(i, &m)| m <= 1 + 2 * (l0 - i as u32))
    }
}

/// The chain from `v` to `α(v)`: repeatedly step to `a(v_s)` (when
/// `ψ = φ`) or to `z(v_s), a(v_s)` (when `ψ < φ`).
pub fn chain_decompose(h: &SkeletonHierarchy, v: VertexId) -> Result<ChainDecomposition, SkeletonError> {
    let mut chain = vec![v];
    let mut link_levels = Vec::new();
    let target = h.alpha(v);
    let mut cur = v;
    let mut last_key: Option<(u32, u32)> = None;
    while cur != target {
        let phi = h.phi(cur);
        let psi = h.psi(cur).ok_or(SkeletonError::RecursionStuck(v, cur))?;
        let key = (phi, psi);
        let terminal = phi == h.l0 && psi == h.l0;
        if !terminal && last_key.is_some_and(|k| k >= key) {
            return Err(SkeletonError::RecursionStuck(v, cur));
        }
        last_key = Some(key);
        let z = h.ancestor(cur, 1 << psi).ok_or(SkeletonError::RecursionStuck(v, cur))?;
        if psi == phi {
            chain.push(z);
            link_levels.push(psi);
            cur = z;
        } else {
            let a = h.x_of(z).ok_or(SkeletonError::RecursionStuck(v, cur))?;
            chain.extend([z, a]);
            link_levels.extend([psi, psi]);
            cur = a;
        }
        if chain.len() > 4 * (h.l0 as usize + 2) * (h.l0 as usize + 2) {
            return Err(SkeletonError::RecursionStuck(v, cur));
        }
    }
    let mut counts = vec![0u32; h.l0 as usize + 1];
    for &i in &link_levels {
        counts[i as usize] += 1;
    }
    Ok(ChainDecomposition { vertex: v, chain, link_levels, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub target: f64,
    pub points: usize,
}

/// Least-squares slope of `ln y` against `x` over the positive entries.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub kappa: u32,
    pub l0: u32,
    pub vertices_checked: usize,
    pub budget_violations: usize,
    pub link_violations: usize,
    pub max_counts: Vec<u32>,
    pub u_sizes: Vec<usize>,
    pub u_fit: Option<SlopeFit>,
    pub j_sizes: Vec<usize>,
    pub j_fit: Option<SlopeFit>,
}

/// Decomposes every vertex and checks each link against the `J_i` sets and
/// each count against `1 + 2(ℓ0 − i)`.
pub fn verify_budgets(h: &SkeletonHierarchy) -> Result<BudgetReport, SkeletonError> {
    let sets: Vec<HashSet<(VertexId, VertexId)>> = (0..=h.l0).map(|i| h.pairs(i).into_iter().collect()).collect();
    let chains: Vec<ChainDecomposition> =
        (0..h.vertex_count()).into_par_iter().map(|v| chain_decompose(h, v)).collect::<Result<_, _>>()?;
    let mut max_counts = vec![0u32; h.l0 as usize + 1];
    let mut budget_violations = 0;
    let mut link_violations = 0;
    for c in &chains {
        budget_violations += usize::from(!c.within_budget(h.l0));
        for (i, m) in c.counts.iter().enumerate() {
            max_counts[i] = max_counts[i].max(*m);
        }
        for (s, &i) in c.link_levels.iter().enumerate() {
            let (a, b) = (c.chain[s], c.chain[s + 1]);
            let set = &sets[i as usize];
            if !set.contains(&(a, b)) && !set.contains(&(b, a)) {
                link_violations += 1;
            }
        }
    }
    let u_sizes: Vec<usize> = h.u.iter().map(Vec::len).collect();
    let eps_kappa = 1.0 / h.kappa as f64;
    let u_pts: Vec<(f64, f64)> = u_sizes.iter().enumerate().skip(1).map(|(j, &s)| (j as f64, s as f64)).collect();
    let u_fit = log_slope(&u_pts).map(|slope| SlopeFit {
        slope,
        target: -eps_kappa * h.kappa as f64,
        points: u_pts.iter().filter(|p| p.1 > 0.0).count(),
    });
    let j_sizes = h.j_sizes();
    let j_pts: Vec<(f64, f64)> = j_sizes.iter().enumerate().map(|(i, &s)| (i as f64, s as f64)).collect();
    let j_fit = log_slope(&j_pts).map(|slope| SlopeFit {
        slope,
        target: -2.0 * std::f64::consts::LN_2,
        points: j_pts.iter().filter(|p| p.1 > 0.0).count(),
    });
    Ok(BudgetReport {
        kappa: h.kappa,
        l0: h.l0,
        vertices_checked: chains.len(),
        budget_violations,
        link_violations,
        max_counts,
        u_sizes,
        u_fit,
        j_sizes,
        j_fit,
    })
}

/// Same as [`verify_budgets`] with the slope target `−εκ` computed from the
/// model's `ε` rather than `1/κ`.
pub fn verify_budgets_for(h: &SkeletonHierarchy, params: &ModelParams) -> Result<BudgetReport, SkeletonError> {
    let mut r = verify_budgets(h)?;
    if let Some(f) = r.u_fit.as_mut() {
        f.target = -params.eps * h.kappa as f64;
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicPairs {
    /// `I_i` as `(u, v)` pairs: `u` is `2^i` closer to `K1` than `v`.
    pub sets: Vec<Vec<(VertexId, VertexId)>>,
    /// `3 ε² n / 2^i`.
    pub bounds: Vec<f64>,
    pub bound_violations: usize,
    /// `I_0` pairs that are not `K2` edges.
    pub i0_non_edges: usize,
    /// Greedy walks to `K1` that used some `I_i` twice, or failed.
    pub walk_violations: usize,
    /// Pairs whose partner is not at distance `2^i` from `v` and
    /// `D − 2^i` from `K1`.
    pub distance_violations: usize,
}

/// Pairs each `K2` vertex at distance `D ≥ 1` from `K1` with the vertex
/// `2^i` steps toward `K1`, `2^i` the largest power of two dividing `D`.
pub fn dyadic_k2_pairs(gs: &GiantSample) -> Result<DyadicPairs, SkeletonError> {
    let k2 = gs.k2_graph();
    let k1: Vec<VertexId> = gs.kernel_vertices().collect();
    let d = k2.bfs_distances(&k1)?;
    let dist = |v: VertexId| d.get(v).expect("K2 is connected") as u64;
    let mut partner = vec![usize::MAX; gs.k2_count];
    for p in &gs.paths {
        let mut seq = Vec::with_capacity(p.length + 1);
        seq.push(p.ends.0);
        seq.extend(&p.internal);
        seq.push(p.ends.1);
        let len = p.length;
        for (pos, &v) in seq.iter().enumerate().take(len).skip(1) {
            let dv = pos.min(len - pos);
            let step = 1usize << dv.trailing_zeros();
            let toward_a = seq[pos - step];
            let toward_b = seq[pos + step];
            partner[v] = match pos.cmp(&(len - pos)) {
                std::cmp::Ordering::Less => toward_a,
                std::cmp::Ordering::Greater => toward_b,
                std::cmp::Ordering::Equal => toward_a.min(toward_b),
            };
        }
    }
    let levels = gs.k2_vertices().filter(|&v| dist(v) > 0).map(|v| dist(v).trailing_zeros()).max().map_or(0, |m| m as usize + 1);
    let mut sets = vec![Vec::new(); levels];
    let mut distance_violations = 0;
    for v in gs.k2_vertices() {
        let dv = dist(v);
        if dv == 0 {
            continue;
        }
        let i = dv.trailing_zeros();
        let u = partner[v];
        if u == usize::MAX {
            distance_violations += 1;
            continue;
        }
        if bounded_hops(&k2, v, u, 1 << i) != Some(1 << i) || dist(u) != dv - (1 << i) {
            distance_violations += 1;
        }
        sets[i as usize].push((u, v));
    }
    let scale = 3.0 * gs.params.eps * gs.params.eps * gs.params.n as f64;
    let bounds: Vec<f64> = (0..levels).map(|i| scale / (1u64 << i) as f64).collect();
    let bound_violations = sets.iter().zip(&bounds).filter(|(s, &b)| s.len() as f64 > b).count();
    let i0_non_edges = sets.first().map_or(0, |s| s.iter().filter(|&&(u, v)| !k2.has_edge(u, v)).count());
    let mut walk_violations = 0;
    for v in gs.k2_vertices() {
        let mut used = 0u64;
        let mut cur = v;
        let mut ok = true;
        while dist(cur) > 0 {
            let i = dist(cur).trailing_zeros();
            if used >> i & 1 == 1 || partner[cur] == usize::MAX {
                ok = false;
                break;
            }
            used |= 1 << i;
            cur = partner[cur];
        }
        walk_violations += usize::from(!ok);
    }
    Ok(DyadicPairs { sets, bounds, bound_violations, i0_non_edges, walk_violations, distance_violations })
}

/// Hop distance from `a` to `b` if it is at most `limit`.
fn bounded_hops(g: &crate::graph::Graph, a: VertexId, b: VertexId, limit: usize) -> Option<usize> {
    let mut seen = HashSet::from([a]);
    let mut frontier = vec![a];
    for d in 0..=limit {
        if frontier.contains(&b) {
            return Some(d);
        }
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in g.neighbors(v) {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValues {
    pub delta: f64,
    pub t_delta: f64,
    /// `Σ_{i ≤ log2(2 ln N / ε)} √(2^i ln(3ε²n / 2^i))`.
    pub chain_sum: f64,
    /// The same sum over its last ten terms.
    pub chain_sum_tail: f64,
    /// `√(2γ(1−γ)) ln N / √ε`.
    pub lower: f64,
    pub gamma: f64,
    /// `ln N / √(2ε)`.
    pub m_target: f64,
}

pub fn bound_evaluators(params: &ModelParams, gamma: f64) -> BoundValues {
    let ln_n = params.big_n.ln();
    let eps = params.eps;
    let delta = ln_n.powf(-1.0 / 3.0);
    let top = (2.0 * ln_n / eps).log2().floor().max(0.0) as u32;
    let big = 3.0 * eps * eps * params.n as f64;
    let terms: Vec<f64> = (0..=top)
        .map(|i| {
            let p = 2f64.powi(i as i32);
            (p * (big / p).ln().max(0.0)).sqrt()
        })
        .collect();
    let chain_sum: f64 = terms.iter().sum();
    let chain_sum_tail: f64 = terms.iter().rev().take(10).sum();
    BoundValues {
        delta,
        t_delta: delta.exp() * ln_n / (2.0 * eps).sqrt(),
        chain_sum,
        chain_sum_tail,
        lower: (2.0 * gamma * (1.0 - gamma)).sqrt() * ln_n / eps.sqrt(),
        gamma,
        m_target: ln_n / (2.0 * eps).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorDiagnostic {
    /// `max_v (η_v − η_{u(v)})`.
    pub via_u: f64,
    /// `max_v (η_v − η_{α(v)})`.
    pub via_alpha: f64,
    /// Vertices with `u(v) ≠ α(v)`.
    pub differing: usize,
}

/// `u(v)`: the chosen `κ`-descendant of `α(v)` when `α(v)` is not in `U`
/// itself and has one; otherwise the nearest ancestor of `v` in `U`.
pub fn anchor_map(h: &SkeletonHierarchy) -> Vec<VertexId> {
    let n = h.vertex_count();
    let mut in_u = vec![false; n];
    let mut pick = vec![NONE; n];
    for level in &h.u {
        for &w in level {
            in_u[w] = true;
            if h.depth[w] > 0 {
                if let Some(a) = h.ancestor(w, h.kappa) {
                    pick[a] = w as u32;
                }
            }
        }
    }
    (0..n)
        .map(|v| {
            let a = h.alpha(v);
            if in_u[a] {
                a
            } else if pick[a] != NONE {
                pick[a] as usize
            } else {
                let mut w = v;
                while !in_u[w] {
                    w = h.parent(w).expect("K2 is in U");
                }
                w
            }
        })
        .collect()
}

pub fn anchor_diagnostic(h: &SkeletonHierarchy, eta: &[f64]) -> AnchorDiagnostic {
    let u = anchor_map(h);
    let mut via_u = f64::NEG_INFINITY;
    let mut via_alpha = f64::NEG_INFINITY;
    let mut differing = 0;
    for v in 0..h.vertex_count() {
        let a = h.alpha(v);
        via_u = via_u.max(eta[v] - eta[u[v]]);
        via_alpha = via_alpha.max(eta[v] - eta[a]);
        differing += usize::from(u[v] != a);
    }
    AnchorDiagnostic { via_u, via_alpha, differing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::giant::{sample_giant, ModelParams};
    use crate::graph::{Graph, Role};

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(0.1), 16);
        assert_eq!(kappa(0.6), 2);
        assert_eq!(kappa(0.5), 2);
        assert_eq!(kappa(0.25), 4);
        assert_eq!(kappa(0.01), 128);
        for eps in [0.013, 0.1, 0.3, 0.77] {
            let k = kappa(eps) as f64;
            assert!(k >= 1.0 / eps && 1.0 / eps > k / 2.0);
        }
    }

    /// Triangle K2 = {0,1,2} with a path tree 0–3–4–5–6 hanging off 0.
    fn path_tree_sample() -> GiantSample {
        let params = ModelParams::new(10_000, 0.6).unwrap();
        let mut gs = sample_giant(&params, 1).unwrap();
        let edges = [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (4, 5), (5, 6)];
        let roles = vec![Role::Kernel, Role::Kernel, Role::Kernel, Role::Tree, Role::Tree, Role::Tree, Role::Tree];
        gs.graph = Graph::build(&edges, roles).unwrap();
        gs.kernel_count = 3;
        gs.k2_count = 3;
        gs.paths = vec![];
        gs.parent = vec![None, None, None, Some(0), Some(3), Some(4), Some(5)];
        gs.depth = vec![0, 0, 0, 1, 2, 3, 4];
        gs.root = vec![0, 1, 2, 0, 0, 0, 0];
        gs
    }

    #[test]
    fn synthetic_path_tree() {
        let gs = path_tree_sample();
        let h = build_hierarchy(&gs).unwrap();
        assert_eq!((h.kappa, h.l0), (2, 1));
        let w2: Vec<_> = (0..7).filter(|&v| h.in_w(v, 2)).collect();
        assert_eq!(w2, vec![0, 1, 2, 4, 6]);
        assert_eq!(h.pairs(0), vec![(0, 3), (3, 4), (4, 5), (5, 6)]);
        assert_eq!(h.pairs(1), vec![(0, 4), (4, 6)]);
        let c = chain_decompose(&h, 5).unwrap();
        assert_eq!(c.chain, vec![5, 4]);
        assert_eq!(c.counts, vec![1, 0]);
        assert!(c.within_budget(h.l0));
        // depth κ vertex in π2(J_ℓ0): one J_ℓ0 link to the root
        let c = chain_decompose(&h, 4).unwrap();
        assert_eq!((c.chain.clone(), c.counts.clone()), (vec![4, 0], vec![0, 1]));
        assert!(chain_decompose(&h, 1).unwrap().chain == vec![1]);
        let r = validate_hierarchy(&gs, &h).unwrap();
        assert!(r.ok(), "{r:?}");
        let b = verify_budgets(&h).unwrap();
        assert_eq!((b.budget_violations, b.link_violations), (0, 0));
    }

    #[test]
    fn no_trees_gives_trivial_hierarchy() {
        let params = ModelParams::with_mu(200_000, 0.1, 0.0).unwrap();
        let gs = sample_giant(&params, 4).unwrap();
        let h = build_hierarchy(&gs).unwrap();
        assert!(h.j_sizes().iter().all(|&s| s == 0));
        assert!(h.u[1..].iter().all(Vec::is_empty));
        assert!(h.w_sizes.iter().all(|&(_, s)| s == gs.k2_count));
        let b = verify_budgets(&h).unwrap();
        assert_eq!(b.budget_violations, 0);
        assert!(b.j_fit.is_none() && b.u_fit.is_none());
        assert!(validate_hierarchy(&gs, &h).unwrap().ok());
    }

    #[test]
    fn sampled_hierarchy_holds() {
        let params = ModelParams::new(200_000, 0.1).unwrap();
        let gs = sample_giant(&params, 7).unwrap();
        let h = build_hierarchy(&gs).unwrap();
        let r = validate_hierarchy(&gs, &h).unwrap();
        assert!(r.ok(), "{r:?}");
        let b = verify_budgets_for(&h, &params).unwrap();
        assert_eq!((b.budget_violations, b.link_violations), (0, 0), "{b:?}");
        assert_eq!(b.vertices_checked, gs.graph.vertex_count());
        let d = dyadic_k2_pairs(&gs).unwrap();
        assert_eq!(
            (d.bound_violations, d.i0_non_edges, d.walk_violations, d.distance_violations),
            (0, 0, 0, 0)
        );
        let total: usize = d.sets.iter().map(Vec::len).sum();
        assert_eq!(total, gs.k2_count - gs.kernel_count);
    }

    #[test]
    fn validator_catches_corruption() {
        let params = ModelParams::new(200_000, 0.1).unwrap();
        let gs = sample_giant(&params, 7).unwrap();
        let mut h = build_hierarchy(&gs).unwrap();
        let v = (0..h.vertex_count()).find(|&v| h.member[v] >> 2 & 1 == 1).unwrap();
        h.member[v] &= !(1 << 1);
        let r = validate_hierarchy(&gs, &h).unwrap();
        assert!(r.d_violations > 0 && r.c_violations > 0, "{r:?}");
        let mut h = build_hierarchy(&gs).unwrap();
        h.member[v] &= !1;
        assert!(validate_hierarchy(&gs, &h).unwrap().b_violations > 0);
    }

    #[test]
    fn bound_values() {
        let p = ModelParams::new(1_000_000, 0.1).unwrap();
        let b = bound_evaluators(&p, 0.5);
        let ln_n = 1000f64.ln();
        assert!((b.lower - b.m_target).abs() < 1e-12 * b.m_target);
        assert!((b.delta - ln_n.powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!((b.t_delta - 26.113_131_243_926_59).abs() < 1e-11, "{}", b.t_delta);
        assert!(b.chain_sum / b.chain_sum_tail < 1.5);
    }
}
