//! Minimal dense matrix kernels for the small (n <= ~10) problems this crate
//! solves: Gram systems, nullspaces, symmetric eigenvalues, and the matrix
//! exponential. Row-major storage.

use crate::scalar::{tol, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DMat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> DMat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &DMat<S>) -> DMat<S> {
        assert_eq!(self.cols, other.rows);
        let mut out = DMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, x)| acc + *a * *x)
            })
            .collect()
    }

    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn scale(&self, s: S) -> DMat<S> {
        DMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| *x * s).collect(),
        }
    }

    pub fn add(&self, other: &DMat<S>) -> DMat<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    /// Solve the square system `self * x = rhs` by Gaussian elimination with
    /// partial pivoting. Returns `None` when the pivot collapses (singular to
    /// working precision).
    pub fn solve(&self, rhs: &[S]) -> Option<Vec<S>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.len());
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        let scale = self.max_abs().max(S::lit(1e-300));
        for col in 0..n {
            let (piv, piv_val) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, S::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_val <= S::lit(1e-13) * scale {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(piv, j)];
                    a[(piv, j)] = tmp;
                }
                b.swap(col, piv);
            }
            let inv = S::one() / a[(col, col)];
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)] * inv;
                if f == S::zero() {
                    continue;
                }
                for j in col..n {
                    a[(r, j)] = a[(r, j)] - f * a[(col, j)];
                }
                b[r] = b[r] - f * b[col];
            }
        }
        Some((0..n).map(|i| b[i] / a[(i, i)]).collect())
    }

    /// Rank via row reduction, with entries below `rel_tol * max_abs` treated
    /// as zero.
    pub fn rank(&self, rel_tol: f64) -> usize {
        self.row_echelon(rel_tol).1.len()
    }

    /// Basis of the (right) nullspace.
    pub fn nullspace(&self, rel_tol: f64) -> Vec<Vec<S>> {
        let (red, pivots) = self.row_echelon(rel_tol);
        let pivot_set: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![S::zero(); self.cols];
            v[fc] = S::one();
            // Back-substitute pivot coordinates.
            for &(pr, pc) in pivots.iter().rev() {
                let mut s = S::zero();
                for j in (pc + 1)..self.cols {
                    s = s + red[(pr, j)] * v[j];
                }
                v[pc] = -s / red[(pr, pc)];
            }
            basis.push(v);
        }
        basis
    }

    /// Row echelon form with partial pivoting; returns the reduced matrix and
    /// the list of (pivot row, pivot column).
    fn row_echelon(&self, rel_tol: f64) -> (DMat<S>, Vec<(usize, usize)>) {
        let mut a = self.clone();
        let scale = self.max_abs().max(S::lit(1e-300));
        let threshold = S::lit(rel_tol) * scale;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let (piv, piv_val) = (row..a.rows)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((row, S::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_val <= threshold {
                continue;
            }
            if piv != row {
                for j in 0..a.cols {
                    let tmp = a[(row, j)];
                    a[(row, j)] = a[(piv, j)];
                    a[(piv, j)] = tmp;
                }
            }
            for r in (row + 1)..a.rows {
                let f = a[(r, col)] / a[(row, col)];
                if f == S::zero() {
                    continue;
                }
                for j in col..a.cols {
                    a[(r, j)] = a[(r, j)] - f * a[(row, j)];
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        (a, pivots)
    }

    /// Eigenvalues of a symmetric matrix by the cyclic Jacobi iteration.
    pub fn jacobi_eigenvalues(&self) -> Vec<S> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Vec::new();
        }
        let mut a = self.clone();
        let scale = self.max_abs().max(S::lit(1e-300));
        let threshold = S::lit(tol::JACOBI) * scale;
        for _sweep in 0..64 {
            let mut off = S::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].abs());
                }
            }
            if off <= threshold {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= threshold * S::lit(1e-2) {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (S::lit(2.0) * apq);
                    let t = {
                        let s = if theta >= S::zero() { S::one() } else { -S::one() };
                        s / (theta.abs() + (S::one() + theta * theta).sqrt())
                    };
                    let c = S::one() / (S::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[(i, i)]).collect()
    }

    /// Matrix exponential by scaling-and-squaring of the Taylor series.
    pub fn expm(&self) -> DMat<S> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let norm = self.max_abs() * S::of_usize(n.max(1));
        let mut squarings = 0u32;
        let mut s = norm;
        while s > S::lit(0.5) {
            s = s * S::lit(0.5);
            squarings += 1;
        }
        let scaled = self.scale(S::lit(0.5).powi(squarings as i32));
        let mut result = DMat::identity(n);
        let mut term = DMat::identity(n);
        for k in 1..=24 {
            term = term.matmul(&scaled).scale(S::one() / S::of_usize(k));
            result = result.add(&term);
            if term.max_abs() < S::lit(1e-20) {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for DMat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for DMat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = DMat::from_rows(&[vec![2.0f64, 1.0], vec![1.0, 3.0]]);
        let x = a.solve(&[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_system_detected() {
        let a = DMat::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 4.0]]);
        assert!(a.solve(&[1.0, 2.0]).is_none());
    }

    #[test]
    fn nullspace_of_projection_conditions() {
        // x + y = 0 in R^3 has a 2-dimensional nullspace.
        let a = DMat::from_rows(&[vec![1.0f64, 1.0, 0.0]]);
        let ns = a.nullspace(1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((v[0] + v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_diag_plus_rotation() {
        // Symmetric matrix with known eigenvalues {3, 1}.
        let a = DMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut ev = a.jacobi_eigenvalues();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ev[0] - 1.0f64).abs() < 1e-12);
        assert!((ev[1] - 3.0f64).abs() < 1e-12);
    }

    #[test]
    fn expm_rotation_block() {
        let theta = 0.7f64;
        let a = DMat::from_rows(&[vec![0.0, -theta], vec![theta, 0.0]]);
        let e = a.expm();
        assert!((e[(0, 0)] - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - theta.sin()).abs() < 1e-14);
    }
}
