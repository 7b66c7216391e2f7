//! Entry-at-a-time reference for [`mrs_step`](super::mrs_step).
//!
//! Sums every term of the scalar recurrence directly from the matrix
//! entries, with no shared products. Slow by design; used only in tests.

use super::SimilarityMatrix;
use crate::corpus::TagResourceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tag,
    Resource,
}

/// One normalized entry of the next tag (or resource) similarity.
///
/// For tags: `ST(a,b) = sum_i sum_j TR[a,i] TR[b,j] w(i,j) sr(i,j)` with
/// `w = 1` on `i == j` and `psi` elsewhere, normalized by
/// `sqrt(ST(a,a) ST(b,b))`. Resources swap the roles of the two axes.
pub fn pairwise_step_oracle(
    tr: &TagResourceMatrix,
    st_prev: &SimilarityMatrix,
    sr_prev: &SimilarityMatrix,
    psi: f64,
    a: usize,
    b: usize,
    side: Side,
) -> Result<f64> {
    let (n, m, prev) = match side {
        Side::Tag => (tr.n_tags(), tr.n_resources(), sr_prev),
        Side::Resource => (tr.n_resources(), tr.n_tags(), st_prev),
    };
    for idx in [a, b] {
        if idx >= n {
            return Err(Error::IndexOutOfRange {
                kind: if side == Side::Tag { "tag" } else { "resource" },
                index: idx,
                size: n,
            });
        }
    }
    let entry = |x: usize, i: usize| -> f64 {
        f64::from(match side {
            Side::Tag => tr.get(x, i),
            Side::Resource => tr.get(i, x),
        })
    };
    let raw = |x: usize, y: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let ex = entry(x, i);
            if ex == 0.0 {
                continue;
            }
            for j in 0..m {
                let ey = entry(y, j);
                if ey == 0.0 {
                    continue;
                }
                let w = if i == j { 1.0 } else { psi };
                acc += ex * ey * w * prev.get(i, j);
            }
        }
        acc
    };
    let (aa, bb) = (raw(a, a), raw(b, b));
    if aa == 0.0 || bb == 0.0 {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    if a == b {
        return Ok(1.0);
    }
    Ok(raw(a, b) / (aa.sqrt() * bb.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let tr = TagResourceMatrix::from_dense(&[vec![1, 1], vec![0, 1]]).unwrap();
        let st = SimilarityMatrix::identity(2).unwrap();
        let sr = SimilarityMatrix::identity(2).unwrap();
        let v = pairwise_step_oracle(&tr, &st, &sr, 0.5, 0, 1, Side::Tag).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let d = pairwise_step_oracle(&tr, &st, &sr, 0.5, 0, 0, Side::Tag).unwrap();
        assert_eq!(d, 1.0);
    }
}
