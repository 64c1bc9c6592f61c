use crate::scalar::{Field, Real};

/// Solves `a x = b` by Gaussian elimination with largest-magnitude pivoting.
/// Works over any [`Field`]; returns `None` for a singular system.
pub fn solve_exact<T: Field>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n), "square system expected");
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let prow = &top[col];
        let p = prow[col].clone();
        for (off, row) in rest.iter_mut().enumerate() {
            if row[col].is_zero() {
                continue;
            }
            let f = row[col].clone() / p.clone();
            for c in col..n {
                let delta = f.clone() * prow[c].clone();
                row[c] = row[c].clone() - delta;
            }
            let db = f * b[col].clone();
            b[col + 1 + off] = b[col + 1 + off].clone() - db;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Some(x)
}

/// Dense Cholesky factor `A = L Lᵀ`, lower triangle packed by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCholesky<T> {
    n: usize,
    l: Vec<T>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl<T: Real> DenseCholesky<T> {
    /// Factors the symmetric matrix whose lower triangle is given packed by
    /// rows. Returns `None` if a pivot is not positive.
    pub fn from_packed(n: usize, mut l: Vec<T>) -> Option<Self> {
        assert_eq!(l.len(), n * (n + 1) / 2);
        for j in 0..n {
            let rj = tri(j, 0);
            let mut d = l[rj + j];
            for k in 0..j {
                d -= l[rj + k] * l[rj + k];
            }
            if !(d > T::zero()) {
                return None;
            }
            let d = d.sqrt();
            l[rj + j] = d;
            for i in j + 1..n {
                let ri = tri(i, 0);
                let mut s = l[ri + j];
                for k in 0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                l[ri + j] = s / d;
            }
        }
        Some(DenseCholesky { n, l })
    }

    /// Factors a full row-major symmetric matrix (only the lower part is read).
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let n = rows.len();
        let mut l = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in rows.iter().enumerate() {
            l.extend_from_slice(&row[..=i]);
        }
        Self::from_packed(n, l)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j > i {
            T::zero()
        } else {
            self.l[tri(i, j)]
        }
    }

    /// In place `L y = b`.
    pub fn solve_lower(&self, b: &mut [T]) {
        for i in 0..self.n {
            let ri = tri(i, 0);
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[ri + k] * b[k];
            }
            b[i] = s / self.l[ri + i];
        }
    }

    /// In place `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &mut [T]) {
        for i in (0..self.n).rev() {
            let ri = tri(i, 0);
            let xi = y[i] / self.l[ri + i];
            y[i] = xi;
            for k in 0..i {
                y[k] -= self.l[ri + k] * xi;
            }
        }
    }

    pub fn solve(&self, b: &mut [T]) {
        self.solve_lower(b);
        self.solve_upper(b);
    }

    /// `L z`: maps independent standard normals to covariance `A`.
    pub fn mul_lower(&self, z: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let ri = tri(i, 0);
                (0..=i).map(|k| self.l[ri + k] * z[k]).sum()
            })
            .collect()
    }

    pub(crate) fn packed_len(&self) -> usize {
        self.l.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn exact_rational_solve() {
        // h(b) = 1 + h(a)/2, h(a) = 1 + h(b) → h(a)=4, h(b)=3
        let a = vec![vec![rat(1, 1), rat(-1, 1)], vec![rat(-1, 2), rat(1, 1)]];
        let x = solve_exact(a, vec![rat(1, 1), rat(1, 1)]).unwrap();
        assert_eq!(x, vec![rat(4, 1), rat(3, 1)]);
    }

    #[test]
    fn singular_system_detected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_exact(a, vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(solve_exact(a, vec![2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn cholesky_round_trip() {
        let a = vec![vec![4.0, 2.0, 0.4], vec![2.0, 5.0, 1.0], vec![0.4, 1.0, 3.0]];
        let c = DenseCholesky::from_rows(&a).unwrap();
        let mut x = vec![1.0, -2.0, 0.5];
        c.solve(&mut x);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((r - [1.0, -2.0, 0.5][i]).abs() < 1e-12);
        }
        // L Lᵀ reproduces A
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| c.get(i, k) * c.get(j, k)).sum();
                assert!((s - a[i][j]).abs() < 1e-12);
            }
        }
        assert!(DenseCholesky::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }

    #[test]
    fn cholesky_f32() {
        let c = DenseCholesky::from_rows(&[vec![2.0f32, -1.0], vec![-1.0, 2.0]]).unwrap();
        let mut x = vec![1.0f32, 0.0];
        c.solve(&mut x);
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-6 && (x[1] - 1.0 / 3.0).abs() < 1e-6);
    }
}
