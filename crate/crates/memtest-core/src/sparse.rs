//! Sparse square systems.
//!
//! The large systems in this crate are `(I - Q)` blocks of absorbing
//! chains: M-matrices with at most a handful of entries per row, nearly
//! tridiagonal except for run-reset jumps. Diagonal pivots are always
//! numerically safe for them, so elimination order is chosen purely to
//! limit fill (greedy Markowitz cost), and accuracy is recovered by
//! iterative refinement against the retained input matrix.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::linalg::{norm_inf, LinalgError};

/// Square sparse matrix, rows sorted by column index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMat {
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        for row in &rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            debug_assert!(row.iter().all(|&(c, _)| c < n));
        }
        Self { n, rows }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `x^T * self`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (r, row) in self.rows.iter().enumerate() {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for &(c, v) in row {
                out[c] += xr * v;
            }
        }
        out
    }
}

/// Elimination record: `target row -= factor * pivot row`.
struct ElimOp {
    target: usize,
    pivot: usize,
    factor: f64,
}

/// LU-style factorization with diagonal pivots in fill-minimizing order.
pub struct SparseLu {
    n: usize,
    pivot_order: Vec<usize>,
    ops: Vec<ElimOp>,
    /// Frozen pivot rows at elimination time (diagonal included).
    urows: Vec<Vec<(usize, f64)>>,
    original: SparseMat,
}

impl SparseLu {
    pub fn factor(a: &SparseMat) -> Result<Self, LinalgError> {
        let n = a.n();
        let mut rows: Vec<BTreeMap<usize, f64>> = a
            .rows
            .iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for (&c, _) in row {
                col_rows[c].insert(r);
            }
        }

        let cost = |rows: &[BTreeMap<usize, f64>], col_rows: &[BTreeSet<usize>], c: usize| {
            let rn = rows[c].len().saturating_sub(1);
            let cn = col_rows[c].len().saturating_sub(1);
            rn * cn
        };

        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n)
            .map(|c| Reverse((cost(&rows, &col_rows, c), c)))
            .collect();
        let mut eliminated = vec![false; n];
        let mut pivot_order = Vec::with_capacity(n);
        let mut ops = Vec::new();
        let mut urows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];

        for _ in 0..n {
            // pop stale heap entries until one matches the current cost
            let pivot = loop {
                let Reverse((c, cand)) = heap.pop().ok_or(LinalgError::SingularSystem {
                    pivot: 0.0,
                    at: pivot_order.len(),
                })?;
                if eliminated[cand] {
                    continue;
                }
                if c == cost(&rows, &col_rows, cand) {
                    break cand;
                }
                heap.push(Reverse((cost(&rows, &col_rows, cand), cand)));
            };

            let diag = *rows[pivot].get(&pivot).unwrap_or(&0.0);
            if diag == 0.0 {
                return Err(LinalgError::SingularSystem {
                    pivot: 0.0,
                    at: pivot_order.len(),
                });
            }
            eliminated[pivot] = true;
            pivot_order.push(pivot);

            let prow: Vec<(usize, f64)> = rows[pivot].iter().map(|(&c, &v)| (c, v)).collect();
            for &(c, _) in &prow {
                col_rows[c].remove(&pivot);
            }
            urows[pivot] = prow.clone();

            let targets: Vec<usize> = col_rows[pivot].iter().copied().collect();
            for r in targets {
                let factor = rows[r][&pivot] / diag;
                ops.push(ElimOp {
                    target: r,
                    pivot,
                    factor,
                });
                rows[r].remove(&pivot);
                col_rows[pivot].remove(&r);
                let mut touched = false;
                for &(c, v) in &prow {
                    if c == pivot {
                        continue;
                    }
                    let entry = rows[r].entry(c).or_insert_with(|| {
                        col_rows[c].insert(r);
                        0.0
                    });
                    *entry -= factor * v;
                    touched = true;
                }
                if touched {
                    heap.push(Reverse((cost(&rows, &col_rows, r), r)));
                }
            }
            // column counts changed for every column the pivot row touched
            for &(c, _) in &prow {
                if !eliminated[c] {
                    heap.push(Reverse((cost(&rows, &col_rows, c), c)));
                }
            }
        }

        Ok(Self {
            n,
            pivot_order,
            ops,
            urows,
            original: a.clone(),
        })
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for op in &self.ops {
            y[op.target] -= op.factor * y[op.pivot];
        }
        let mut x = vec![0.0; self.n];
        for &p in self.pivot_order.iter().rev() {
            let mut v = y[p];
            let mut diag = 0.0;
            for &(c, u) in &self.urows[p] {
                if c == p {
                    diag = u;
                } else {
                    v -= u * x[c];
                }
            }
            x[p] = v / diag;
        }
        x
    }

    /// Solve with iterative refinement; returns `(x, residual_inf_norm)`.
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
