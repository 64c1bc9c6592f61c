use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::dense::DenseCholesky;
use super::{Laplacian, SolveError};
use crate::scalar::Real;

/// Minimum-degree elimination stops once every remaining vertex has more
/// than this many neighbors in the Schur complement; the rest is factored
/// as a dense block.
pub const DENSE_SWITCH_DEGREE: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactorStats {
    pub dim: usize,
    pub sparse_eliminated: usize,
    pub dense_dim: usize,
    pub nnz: usize,
}

/// `A = L Lᵀ` where the rows of `L` are ordered by elimination: first the
/// vertices removed by minimum degree, then a dense tail.
#[derive(Debug, Clone)]
pub struct SparseCholesky<T> {
    dim: usize,
    order: Vec<usize>,
    pivot: Vec<T>,
    col_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    col_val: Vec<T>,
    tail: Vec<usize>,
    dense: DenseCholesky<T>,
}

fn entry<T: Real>(row: &mut Vec<(u32, T)>, j: u32) -> &mut T {
    match row.iter().position(|&(c, _)| c == j) {
        Some(p) => &mut row[p].1,
        None => {
            row.push((j, T::zero()));
            &mut row.last_mut().unwrap().1
        }
    }
}

impl<T: Real> SparseCholesky<T> {
    pub fn factor(a: &Laplacian<T>) -> Result<Self, SolveError> {
        Self::factor_with_switch(a, DENSE_SWITCH_DEGREE)
    }

    pub fn factor_with_switch(a: &Laplacian<T>, switch_degree: usize) -> Result<Self, SolveError> {
        let n = a.dim();
        let mut diag: Vec<T> = (0..n).map(|i| a.diag(i)).collect();
        let mut adj: Vec<Vec<(u32, T)>> = (0..n)
            .map(|i| a.row(i).filter(|&(j, _)| j != i).map(|(j, v)| (j as u32, v)).collect())
            .collect();
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((adj[i].len(), i))).collect();

        let mut order = Vec::new();
        let mut pivot = Vec::new();
        let mut col_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut col_val = Vec::new();
        let mut scratch: Vec<(u32, T)> = Vec::new();

        while let Some(&Reverse((deg, v))) = heap.peek() {
            if done[v] || deg != adj[v].len() {
                heap.pop();
                continue;
            }
            if deg > switch_degree {
                break;
            }
            heap.pop();
            let d = diag[v];
            if !(d > T::zero()) {
                return Err(SolveError::FactorizationFailed(v));
            }
            let p = d.sqrt();
            done[v] = true;
            scratch.clear();
            scratch.extend(adj[v].drain(..).map(|(j, s)| (j, s / p)));
            for &(j, l) in &scratch {
                let row = &mut adj[j as usize];
                let pos = row.iter().position(|&(c, _)| c as usize == v).expect("symmetric pattern");
                row.swap_remove(pos);
                diag[j as usize] -= l * l;
            }
            for (x, &(ja, la)) in scratch.iter().enumerate() {
                for &(jb, lb) in &scratch[x + 1..] {
                    let u = la * lb;
                    *entry(&mut adj[ja as usize], jb) -= u;
                    *entry(&mut adj[jb as usize], ja) -= u;
                }
            }
            for &(j, _) in &scratch {
                heap.push(Reverse((adj[j as usize].len(), j as usize)));
            }
            order.push(v);
            pivot.push(p);
            col_idx.extend(scratch.iter().map(|&(j, _)| j));
            col_val.extend(scratch.iter().map(|&(_, l)| l));
            col_ptr.push(col_idx.len());
        }

        let tail: Vec<usize> = (0..n).filter(|&i| !done[i]).collect();
        let mut pos = vec![usize::MAX; n];
        for (k, &i) in tail.iter().enumerate() {
            pos[i] = k;
        }
        let m = tail.len();
        let mut packed = vec![T::zero(); m * (m + 1) / 2];
        for (r, &i) in tail.iter().enumerate() {
            packed[r * (r + 1) / 2 + r] = diag[i];
            for &(j, s) in &adj[i] {
                let c = pos[j as usize];
                if c < r {
                    packed[r * (r + 1) / 2 + c] = s;
                }
            }
        }
        drop(adj);
        let dense = DenseCholesky::from_packed(m, packed)
            .ok_or_else(|| SolveError::FactorizationFailed(tail.first().copied().unwrap_or(0)))?;
        Ok(SparseCholesky { dim: n, order, pivot, col_ptr, col_idx, col_val, tail, dense })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stats(&self) -> FactorStats {
        FactorStats {
            dim: self.dim,
            sparse_eliminated: self.order.len(),
            dense_dim: self.tail.len(),
            nnz: self.order.len() + self.col_idx.len() + self.dense.packed_len(),
        }
    }

    /// In place `L y = b`.
    pub fn forward(&self, b: &mut [T]) {
        for (k, &v) in self.order.iter().enumerate() {
            let y = b[v] / self.pivot[k];
            b[v] = y;
            let r = self.col_ptr[k]..self.col_ptr[k + 1];
            for (&i, &l) in self.col_idx[r.clone()].iter().zip(&self.col_val[r]) {
                b[i as usize] -= l * y;
            }
        }
        let mut t: Vec<T> = self.tail.iter().map(|&i| b[i]).collect();
        self.dense.solve_lower(&mut t);
        for (&i, x) in self.tail.iter().zip(t) {
            b[i] = x;
        }
    }

    /// In place `Lᵀ x = y`. Applied to i.i.d. standard normals this yields
    /// a Gaussian vector with covariance `A⁻¹`.
    pub fn backward(&self, y: &mut [T]) {
        let mut t: Vec<T> = self.tail.iter().map(|&i| y[i]).collect();
        self.dense.solve_upper(&mut t);
        for (&i, x) in self.tail.iter().zip(t) {
            y[i] = x;
        }
        for k in (0..self.order.len()).rev() {
            let v = self.order[k];
            let r = self.col_ptr[k]..self.col_ptr[k + 1];
            let mut s = y[v];
            for (&i, &l) in self.col_idx[r.clone()].iter().zip(&self.col_val[r]) {
                s -= l * y[i as usize];
            }
            y[v] = s / self.pivot[k];
        }
    }

    pub fn solve(&self, b: &mut [T]) {
        self.forward(b);
        self.backward(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Role};
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
        let mut rng = rng_from_seed(seed);
        let mut edges = std::collections::BTreeSet::new();
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

    #[test]
    fn matches_dense_solve_across_switch_points() {
        let g = random_connected(120, 150, 4);
        let lap = Laplacian::<f64>::grounded(&g, 7);
        let dense = DenseCholesky::from_rows(&lap.to_dense()).unwrap();
        let b: Vec<f64> = (0..lap.dim()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mut want = b.clone();
        dense.solve(&mut want);
        for switch in [0, 2, 3, 8, 1000] {
            let f = SparseCholesky::factor_with_switch(&lap, switch).unwrap();
            let mut x = b.clone();
            f.solve(&mut x);
            let err = x.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "switch {switch}: err {err}");
            assert!(lap.relative_residual(&x, &b) < 1e-12);
            let s = f.stats();
            assert_eq!(s.sparse_eliminated + s.dense_dim, lap.dim());
        }
    }

    #[test]
    fn trees_need_no_dense_tail() {
        let edges: Vec<_> = (1..500).map(|v| ((v - 1) / 3, v)).collect();
        let g = Graph::with_uniform_role(500, &edges, Role::Tree).unwrap();
        let lap = Laplacian::<f64>::grounded(&g, 0);
        let f = SparseCholesky::factor(&lap).unwrap();
        assert_eq!(f.stats().dense_dim, 0);
        // tree elimination creates no fill
        assert_eq!(f.stats().nnz, 2 * lap.dim() - 1 - (g.degree(0) - 1));
    }

    #[test]
    fn singular_matrix_fails() {
        let g = Graph::with_uniform_role(4, &[(0, 1), (2, 3)], Role::Kernel).unwrap();
        let lap = Laplacian::<f64>::grounded(&g, 0);
        assert!(matches!(SparseCholesky::factor(&lap), Err(SolveError::FactorizationFailed(_))));
    }
}
