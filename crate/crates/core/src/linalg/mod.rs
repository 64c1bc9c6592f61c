//! Graph Laplacians and the solvers used on them: dense Cholesky for small
//! systems, a sparse Cholesky with a minimum-degree ordering and a dense
//! tail, Jacobi-preconditioned conjugate gradients, and exact elimination
//! over any [`Field`](crate::scalar::Field).

mod cg;
mod dense;
mod sparse;

pub use cg::{pcg, CgOutcome};
pub use dense::{solve_exact, DenseCholesky};
pub use sparse::{FactorStats, SparseCholesky, DENSE_SWITCH_DEGREE};

use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    Diverged { iterations: usize, residual: f64 },
    #[error("factorization failed: non-positive pivot at index {0}")]
    FactorizationFailed(usize),
    #[error("graph is disconnected")]
    Disconnected,
}

/// `L = D − A` in CSR form, optionally grounded (one vertex's row and
/// column removed). Row `i` corresponds to graph vertex `vertex_of[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian<T> {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
    vertex_of: Vec<VertexId>,
    index_of: Vec<Option<usize>>,
    pin: Option<VertexId>,
}

impl<T: Real> Laplacian<T> {
    pub fn from_graph(g: &Graph) -> Self {
        Self::assemble(g, None)
    }

    /// Grounded Laplacian with `pin` removed; symmetric positive definite
    /// when `g` is connected.
    pub fn grounded(g: &Graph, pin: VertexId) -> Self {
        Self::assemble(g, Some(pin))
    }

    fn assemble(g: &Graph, pin: Option<VertexId>) -> Self {
        let n = g.vertex_count();
        let mut index_of = vec![None; n];
        let mut vertex_of = Vec::with_capacity(n);
        for v in 0..n {
            if Some(v) != pin {
                index_of[v] = Some(vertex_of.len());
                vertex_of.push(v);
            }
        }
        let mut row_ptr = Vec::with_capacity(vertex_of.len() + 1);
        let mut col = Vec::with_capacity(2 * g.edge_count() + n);
        let mut val = Vec::with_capacity(2 * g.edge_count() + n);
        row_ptr.push(0);
        for (i, &v) in vertex_of.iter().enumerate() {
            col.push(i);
            val.push(T::of_usize(g.degree(v)));
            for &w in g.neighbors(v) {
                if let Some(j) = index_of[w] {
                    col.push(j);
                    val.push(-T::one());
                }
            }
            row_ptr.push(col.len());
        }
        Laplacian { row_ptr, col, val, vertex_of, index_of, pin }
    }

    pub fn dim(&self) -> usize {
        self.vertex_of.len()
    }

    pub fn pin(&self) -> Option<VertexId> {
        self.pin
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.index_of[v]
    }

    pub fn vertex_of(&self, i: usize) -> VertexId {
        self.vertex_of[i]
    }

    /// `(column, value)` pairs of row `i`, diagonal first.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn diag(&self, i: usize) -> T {
        self.val[self.row_ptr[i]]
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.row(i).map(|(_, a)| a).sum()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        let mut out = vec![vec![T::zero(); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, a) in self.row(i) {
                row[j] += a;
            }
        }
        out
    }

    /// `‖b − L x‖ / ‖b‖` (or `‖L x‖` when `b = 0`).
    pub fn relative_residual(&self, x: &[T], b: &[T]) -> T {
        let mut r = vec![T::zero(); self.dim()];
        self.matvec(x, &mut r);
        let num: T = r.iter().zip(b).map(|(&ri, &bi)| (bi - ri) * (bi - ri)).sum::<T>().sqrt();
        let den: T = b.iter().map(|&bi| bi * bi).sum::<T>().sqrt();
        if den > T::zero() {
            num / den
        } else {
            num
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Role;

    #[test]
    fn row_sums_vanish_and_grounding_drops_pin() {
        let g = Graph::with_uniform_role(4, &[(0, 1), (1, 2), (2, 0), (2, 3)], Role::Kernel).unwrap();
        let l = Laplacian::<f64>::from_graph(&g);
        assert!(l.row_sums().iter().all(|&s| s == 0.0));
        let lg = Laplacian::<f64>::grounded(&g, 2);
        assert_eq!(lg.dim(), 3);
        assert_eq!(lg.index_of(2), None);
        assert_eq!(lg.vertex_of(2), 3);
        let d = lg.to_dense();
        assert_eq!(d, vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!(DenseCholesky::from_rows(&d).is_some());
    }
}
