//! Dense linear algebra for desk-scale systems: LU with partial
//! pivoting and iterative refinement, and column-pivoted Householder QR
//! used for rank decisions, orthonormal kernel bases, and least squares.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    SingularSystem { pivot: f64, at: usize },
    ShapeMismatch,
    RankDeficient { rank: usize, expected: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::SingularSystem { pivot, at } => {
                write!(f, "singular system: pivot {pivot} at step {at}")
            }
            LinalgError::ShapeMismatch => write!(f, "matrix shape mismatch"),
            LinalgError::RankDeficient { rank, expected } => {
                write!(f, "rank {rank}, expected {expected}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> DMat {
        let mut t = DMat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| dot(self.row_slice(r), x))
            .collect()
    }

    /// `x^T * self` for a row vector `x`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            let row = self.row_slice(r);
            for c in 0..self.cols {
                out[c] += xr * row[c];
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| math::abs(*x)).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| {
        let v = math::abs(*x);
        if v > m {
            v
        } else {
            m
        }
    })
}

/// LU factors of a square matrix, with the original retained so solves
/// can run one round of iterative refinement.
pub struct LuFactors {
    n: usize,
    lu: DMat,
    perm: Vec<usize>,
    original: DMat,
}

impl LuFactors {
    pub fn factor(a: &DMat) -> Result<Self, LinalgError> {
        if a.rows() != a.cols() {
            return Err(LinalgError::ShapeMismatch);
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = math::abs(lu.get(k, k));
            for r in k + 1..n {
                let v = math::abs(lu.get(r, k));
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::SingularSystem { pivot: 0.0, at: k });
            }
            if piv != k {
                perm.swap(k, piv);
                for c in 0..n {
                    let tmp = lu.get(k, c);
                    lu.set(k, c, lu.get(piv, c));
                    lu.set(piv, c, tmp);
                }
            }
            let d = lu.get(k, k);
            for r in k + 1..n {
                let f = lu.get(r, k) / d;
                lu.set(r, k, f);
                if f != 0.0 {
                    for c in k + 1..n {
                        let v = lu.get(r, c) - f * lu.get(k, c);
                        lu.set(r, c, v);
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            original: a.clone(),
        })
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = b[self.perm[i]];
            for j in 0..i {
                v -= self.lu.get(i, j) * y[j];
            }
            y[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in i + 1..n {
                v -= self.lu.get(i, j) * y[j];
            }
            y[i] = v / self.lu.get(i, i);
        }
        y
    }

    /// Solve with one refinement pass; returns `(x, residual_inf_norm)`.
    pub fn solve_refined(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let mut x = self.substitute(b);
        for _ in 0..2 {
            let r = self.residual(b, &x);
            if norm_inf(&r) == 0.0 {
                break;
            }
            let dx = self.substitute(&r);
            for i in 0..self.n {
                x[i] += dx[i];
            }
        }
        let r = self.residual(b, &x);
        (x, norm_inf(&r))
    }

    fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let ax = self.original.mul_vec(x);
        b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
    }
}

/// Column-pivoted Householder QR of `a` (`m x k`): `a * P = Q * R` with
/// `Q` square `m x m` orthogonal. Rank is decided against
/// `rel_tol * |R[0,0]|`.
pub struct QrFactors {
    pub q: DMat,
    pub r: DMat,
    /// `perm[j]` = original column placed at position `j`.
    pub perm: Vec<usize>,
    pub rank: usize,
}

pub fn qr_factor(a: &DMat, rel_tol: f64) -> QrFactors {
    let m = a.rows();
    let k = a.cols();
    let steps = m.min(k);
    let mut r = a.clone();
    let mut q = DMat::identity(m);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rank = 0;
    let mut first_pivot = 0.0;

    for s in 0..steps {
        // strongest remaining column
        let mut best_col = s;
        let mut best_norm = -1.0;
        for c in s..k {
            let mut n2 = 0.0;
            for row in s..m {
                let v = r.get(row, c);
                n2 += v * v;
            }
            if n2 > best_norm {
                best_norm = n2;
                best_col = c;
            }
        }
        if best_col != s {
            perm.swap(s, best_col);
            for row in 0..m {
                let tmp = r.get(row, s);
                r.set(row, s, r.get(row, best_col));
                r.set(row, best_col, tmp);
            }
        }

        let col_norm = math::sqrt(best_norm.max(0.0));
        if s == 0 {
            first_pivot = col_norm;
        }
        if col_norm <= rel_tol * first_pivot || col_norm == 0.0 {
            break;
        }
        rank += 1;

        // Householder vector for column s below the diagonal
        let x0 = r.get(s, s);
        let alpha = if x0 >= 0.0 { -col_norm } else { col_norm };
        let mut v = vec![0.0; m - s];
        v[0] = x0 - alpha;
        for row in s + 1..m {
            v[row - s] = r.get(row, s);
        }
        let vtv = dot(&v, &v);
        if vtv > 0.0 {
            // apply H = I - 2 v v^T / (v^T v) to R[s.., s..]
            for c in s..k {
                let mut proj = 0.0;
                for row in s..m {
                    proj += v[row - s] * r.get(row, c);
                }
                let f = 2.0 * proj / vtv;
                for row in s..m {
                    let val = r.get(row, c) - f * v[row - s];
                    r.set(row, c, val);
                }
            }
            // accumulate Q <- Q * H
            for row in 0..m {
                let mut proj = 0.0;
                for c in s..m {
                    proj += q.get(row, c) * v[c - s];
                }
                let f = 2.0 * proj / vtv;
                for c in s..m {
                    let val = q.get(row, c) - f * v[c - s];
                    q.set(row, c, val);
                }
            }
        }
        r.set(s, s, alpha);
        for row in s + 1..m {
            r.set(row, s, 0.0);
        }
    }

    QrFactors { q, r, perm, rank }
}

/// Orthonormal basis of the null space `{x : a x = 0}`, returned as one
/// vector per basis element. Rank tolerance is relative to the largest
/// pivot of the column-pivoted QR of `a^T`.
pub fn kernel_basis(a: &DMat, rel_tol: f64) -> Vec<Vec<f64>> {
    let at = a.transpose();
    let f = qr_factor(&at, rel_tol);
    let n = at.rows();
    (f.rank..n)
        .map(|c| (0..n).map(|row| f.q.get(row, c)).collect())
        .collect()
}

/// Least-squares solution of `a x = b` for full-column-rank `a`
/// (`m >= k`). Errors when the numerical rank falls short.
pub fn solve_least_squares(a: &DMat, b: &[f64], rel_tol: f64) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != b.len() || a.rows() < a.cols() {
        return Err(LinalgError::ShapeMismatch);
    }
    let k = a.cols();
    let f = qr_factor(a, rel_tol);
    if f.rank < k {
        return Err(LinalgError::RankDeficient {
            rank: f.rank,
            expected: k,
        });
    }
    // Q^T b, then back-substitute through R, then undo the column pivots.
    let mut qtb = vec![0.0; k];
    for c in 0..k {
        let mut v = 0.0;
        for row in 0..a.rows() {
            v += f.q.get(row, c) * b[row];
        }
        qtb[c] = v;
    }
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut v = qtb[i];
        for j in i + 1..k {
            v -= f.r.get(i, j) * y[j];
        }
        y[i] = v / f.r.get(i, i);
    }
    let mut x = vec![0.0; k];
    for (pos, &orig) in f.perm.iter().enumerate() {
        x[orig] = y[pos];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, unit_f64};

    #[test]
    fn lu_solves_small_system() {
        let a = DMat::from_rows(vec![
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let f = LuFactors::factor(&a).unwrap();
        let b = vec![1.0, 2.0, 3.0];
        let (x, res) = f.solve_refined(&b);
        let ax = a.mul_vec(&x);
        for (l, r) in ax.iter().zip(&b) {
            assert!((l - r).abs() < 1e-12);
        }
        assert!(res < 1e-12);
    }

    #[test]
    fn lu_detects_singular() {
        let a = DMat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(LuFactors::factor(&a).is_err());
    }

    #[test]
    fn qr_reconstructs_and_ranks() {
        let mut rng = stream_rng(11, 0);
        let m = 7;
        let k = 4;
        let mut a = DMat::zeros(m, k);
        for r in 0..m {
            for c in 0..k {
                a.set(r, c, unit_f64(&mut rng) - 0.5);
            }
        }
        let f = qr_factor(&a, 1e-12);
        assert_eq!(f.rank, 4);
        // Q R == A P
        for r in 0..m {
            for c in 0..k {
                let mut v = 0.0;
                for t in 0..m {
                    v += f.q.get(r, t) * f.r.get(t, c);
                }
                assert!((v - a.get(r, f.perm[c])).abs() < 1e-10);
            }
        }
        // Q orthogonal
        for i in 0..m {
            for j in 0..m {
                let mut v = 0.0;
                for t in 0..m {
                    v += f.q.get(t, i) * f.q.get(t, j);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kernel_of_ones_row() {
        // kernel of [1 1 1] is the 2-dimensional zero-sum subspace
        let a = DMat::from_rows(vec![vec![1.0, 1.0, 1.0]]);
        let basis = kernel_basis(&a, 1e-10);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(v.iter().sum::<f64>().abs() < 1e-10);
            assert!((norm2(v) - 1.0).abs() < 1e-10);
        }
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-10);
    }

    #[test]
    fn kernel_detects_duplicated_rows() {
        let a = DMat::from_rows(vec![
            vec![1.0, 0.0, 1.0, 0.0],
            vec![2.0, 0.0, 2.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ]);
        let basis = kernel_basis(&a, 1e-10);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let av = a.mul_vec(v);
            assert!(norm_inf(&av) < 1e-10);
        }
    }

    #[test]
    fn least_squares_exact_for_square() {
        let a = DMat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = solve_least_squares(&a, &[3.0, 5.0], 1e-12).unwrap();
        let ax = a.mul_vec(&x);
        assert!((ax[0] - 3.0).abs() < 1e-12);
        assert!((ax[1] - 5.0).abs() < 1e-12);
    }
}
