//! Dense/sparse products shared by the similarity engines.

use crate::corpus::TagResourceMatrix;
use crate::par;

/// Compressed sparse rows with real values.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    pub rows: usize,
    pub cols: usize,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    pub fn from_rows<I, R>(cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = (usize, f64)>,
    {
        let mut ptr = vec![0];
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for row in rows {
            for (j, v) in row {
                idx.push(j);
                val.push(v);
            }
            ptr.push(idx.len());
        }
        Self {
            rows: ptr.len() - 1,
            cols,
            ptr,
            idx,
            val,
        }
    }

    /// Tag rows of `TR` with counts as reals.
    pub fn tag_rows(tr: &TagResourceMatrix) -> Self {
        Self::from_rows(
            tr.n_resources(),
            (0..tr.n_tags()).map(|t| {
                let (idx, val) = tr.row_parts(t);
                idx.iter().copied().zip(val.iter().map(|&c| f64::from(c)))
            }),
        )
    }

    /// Resource rows of `TR` (the rows of its transpose).
    pub fn resource_rows(tr: &TagResourceMatrix) -> Self {
        Self::from_rows(
            tr.n_tags(),
            (0..tr.n_resources()).map(|r| {
                let (idx, val) = tr.col_parts(r);
                idx.iter().copied().zip(val.iter().map(|&c| f64::from(c)))
            }),
        )
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.ptr[i], self.ptr[i + 1]);
        (&self.idx[lo..hi], &self.val[lo..hi])
    }
}

/// Computes `A * S * A^T` for sparse `A` (`n x m`) and dense symmetric `S`
/// (`m x m`, row-major). The result is dense, row-major and exactly
/// symmetric: only the upper triangle is reduced, then mirrored.
///
/// Each output entry is accumulated by a single worker in ascending index
/// order, so the result is bit-identical for any degree of parallelism.
pub(crate) fn sandwich(a: &Csr, s: &[f64]) -> Vec<f64> {
    let n = a.rows;
    let m = a.cols;
    debug_assert_eq!(s.len(), m * m);

    // left = A * S
    let mut left = vec![0.0; n * m];
    par::fill_rows(&mut left, m, |i, out| {
        let (idx, val) = a.row(i);
        for (&k, &v) in idx.iter().zip(val) {
            let srow = &s[k * m..(k + 1) * m];
            for (o, &x) in out.iter_mut().zip(srow) {
                *o += v * x;
            }
        }
    });

    let mut out = vec![0.0; n * n];
    par::fill_rows(&mut out, n, |i, row| {
        let li = &left[i * m..(i + 1) * m];
        for (j, cell) in row.iter_mut().enumerate().skip(i) {
            let (idx, val) = a.row(j);
            let mut acc = 0.0;
            for (&k, &v) in idx.iter().zip(val) {
                acc += li[k] * v;
            }
            *cell = acc;
        }
    });
    mirror_upper(&mut out, n);
    out
}

/// Computes `A * A^T` for sparse `A`; same layout and determinism as
/// [`sandwich`] with `S = I`.
pub(crate) fn gram(a: &Csr) -> Vec<f64> {
    let n = a.rows;
    let m = a.cols;
    let mut out = vec![0.0; n * n];
    par::fill_rows(&mut out, n, |i, row| {
        let mut dense = vec![0.0; m];
        let (idx, val) = a.row(i);
        for (&k, &v) in idx.iter().zip(val) {
            dense[k] = v;
        }
        for (j, cell) in row.iter_mut().enumerate().skip(i) {
            let (idx, val) = a.row(j);
            let mut acc = 0.0;
            for (&k, &v) in idx.iter().zip(val) {
                acc += dense[k] * v;
            }
            *cell = acc;
        }
    });
    mirror_upper(&mut out, n);
    out
}

/// Rescales a Gram-like matrix to `x_ab / (sqrt(x_aa) sqrt(x_bb))`, pinning
/// the diagonal to 1 and clamping rounding overshoot at 1. Indices with a
/// zero diagonal get identity rows and are returned.
pub(crate) fn normalize_gram(mut raw: Vec<f64>, n: usize) -> (Vec<f64>, Vec<usize>) {
    let roots: Vec<f64> = (0..n).map(|i| raw[i * n + i].sqrt()).collect();
    let zero: Vec<usize> = (0..n).filter(|&i| roots[i] == 0.0).collect();
    par::fill_rows(&mut raw, n, |a, row| {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = if a == b {
                1.0
            } else if roots[a] == 0.0 || roots[b] == 0.0 {
                0.0
            } else {
                (*cell * (1.0 / (roots[a] * roots[b]))).min(1.0)
            };
        }
    });
    (raw, zero)
}

/// Copies the upper triangle of a row-major square matrix onto the lower.
pub(crate) fn mirror_upper(data: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
}
