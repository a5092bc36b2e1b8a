//! Minimal dense linear algebra for the recurrent cells.
//!
//! Row-major matrices over any [`Scalar`]. Shapes here are tiny (hidden
//! widths in the tens), so plain loops are all that is needed.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            data.extend(row);
        }
        Mat {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// y += A x
    pub fn matvec_add(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = S::zero();
            for (a, b) in row.iter().zip(x) {
                acc = acc + *a * *b;
            }
            y[r] = y[r] + acc;
        }
    }

    /// y += Aᵀ x
    pub fn matvec_transpose_add(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            let xr = x[r];
            for (yc, a) in y.iter_mut().zip(row) {
                *yc = *yc + *a * xr;
            }
        }
    }

    /// A += a xᵀ (outer-product accumulation)
    pub fn outer_add(&mut self, a: &[S], x: &[S]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for r in 0..self.rows {
            let ar = a[r];
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (cell, xc) in row.iter_mut().zip(x) {
                *cell = *cell + ar * *xc;
            }
        }
    }
}

/// z = Σ aᵢ bᵢ
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + *x * *y;
    }
    acc
}

/// y += alpha * x
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree_with_hand_results() {
        let m = Mat::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let mut y = vec![0.0; 3];
        m.matvec_add(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 7.0, 11.0]);

        let mut yt = vec![0.0; 2];
        m.matvec_transpose_add(&[1.0, 1.0, 1.0], &mut yt);
        assert_eq!(yt, vec![9.0, 12.0]);
    }

    #[test]
    fn outer_add_accumulates() {
        let mut m = Mat::zeros(2, 2);
        m.outer_add(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(m.data, vec![3.0, 4.0, 6.0, 8.0]);
    }
}
