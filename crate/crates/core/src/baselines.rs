//! Reference similarity metrics: plain cosine, SimRank and LSI.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TagResourceMatrix;
use crate::error::{invalid, Result};
use crate::kernel::{gram, normalize_gram, sandwich, Csr};
use crate::par;
use crate::simcore::SimilarityMatrix;

/// Cosine of the tag rows of `TR`. Tags with an empty row are similar only
/// to themselves.
pub fn cosine_similarity_matrix(tr: &TagResourceMatrix) -> Result<SimilarityMatrix> {
    let n = tr.n_tags();
    let (data, _) = normalize_gram(gram(&Csr::tag_rows(tr)), n);
    SimilarityMatrix::from_dense(n, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRankConfig {
    /// Decay for tag-tag scores.
    pub c1: f64,
    /// Decay for resource-resource scores.
    pub c2: f64,
    pub iterations: usize,
}

impl Default for SimRankConfig {
    fn default() -> Self {
        Self {
            c1: 0.8,
            c2: 0.8,
            iterations: 10,
        }
    }
}

impl SimRankConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if !(0.0..=1.0).contains(&c) {
                return Err(invalid(name, format!("must lie in [0,1], got {c}")));
            }
        }
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// Bipartite SimRank over the support of `TR`. Returns `(st, sr)`.
///
/// `st(a,b) = c1 / (|r(a)| |r(b)|) * sum_{i in r(a), j in r(b)} sr(i,j)`, and
/// symmetrically for resources, both updated from the previous pair. Self
/// similarity stays 1; items without neighbours score 0 against the rest.
pub fn simrank_compute(
    tr: &TagResourceMatrix,
    cfg: &SimRankConfig,
) -> Result<(SimilarityMatrix, SimilarityMatrix)> {
    cfg.validate()?;
    let (nt, nr) = (tr.n_tags(), tr.n_resources());
    let averaging = |rows: usize, cols: usize, neighbours: &dyn Fn(usize) -> Vec<usize>| {
        Csr::from_rows(
            cols,
            (0..rows).map(|x| {
                let nb = neighbours(x);
                let w = 1.0 / nb.len() as f64;
                nb.into_iter().map(move |j| (j, w))
            }),
        )
    };
    let tags = averaging(nt, nr, &|t| tr.row(t).map(|(r, _)| r).collect());
    let resources = averaging(nr, nt, &|r| tr.col(r).map(|(t, _)| t).collect());

    let mut st = identity_dense(nt);
    let mut sr = identity_dense(nr);
    for _ in 0..cfg.iterations {
        let next_st = decay(sandwich(&tags, &sr), nt, cfg.c1);
        let next_sr = decay(sandwich(&resources, &st), nr, cfg.c2);
        st = next_st;
        sr = next_sr;
    }
    Ok((
        SimilarityMatrix::from_dense(nt, st)?,
        SimilarityMatrix::from_dense(nr, sr)?,
    ))
}

fn identity_dense(n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        d[i * n + i] = 1.0;
    }
    d
}

fn decay(mut raw: Vec<f64>, n: usize, c: f64) -> Vec<f64> {
    par::fill_rows(&mut raw, n, |a, row| {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = if a == b { 1.0 } else { (c * *cell).min(1.0) };
        }
    });
    raw
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsiConfig {
    /// Latent dimension.
    pub k: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl Default for LsiConfig {
    fn default() -> Self {
        Self {
            k: 64,
            power_iterations: 8,
            seed: 0,
        }
    }
}

const OVERSAMPLE: usize = 8;

/// Cosine between tags in a rank-`k` latent space of `TR`.
///
/// The top-`k` left singular subspace is found by a seeded randomized range
/// finder with `power_iterations` rounds of re-orthonormalized power
/// iteration. A tag's latent vector is its row of `U_k Sigma_k`, i.e. the
/// projection of its `TR` row onto the top right singular vectors. Scores
/// lie in `[-1, 1]`.
pub fn lsi_similarity_matrix(tr: &TagResourceMatrix, cfg: &LsiConfig) -> Result<SimilarityMatrix> {
    let (nt, nr) = (tr.n_tags(), tr.n_resources());
    let max_k = nt.min(nr);
    if cfg.k == 0 || cfg.k > max_k {
        return Err(invalid(
            "k",
            format!("must lie in [1,{max_k}], got {}", cfg.k),
        ));
    }
    if cfg.power_iterations == 0 {
        return Err(invalid("power_iterations", "must be at least 1"));
    }
    let latent = lsi_latent(tr, cfg)?;
    let n = latent.len() / cfg.k;
    let k = cfg.k;

    let mut out = vec![0.0; n * n];
    par::fill_rows(&mut out, n, |i, row| {
        let vi = &latent[i * k..(i + 1) * k];
        for (j, cell) in row.iter_mut().enumerate().skip(i) {
            let vj = &latent[j * k..(j + 1) * k];
            *cell = vi.iter().zip(vj).map(|(x, y)| x * y).sum();
        }
    });
    crate::kernel::mirror_upper(&mut out, n);
    let (mut data, _) = normalize_gram(out, n);
    for x in &mut data {
        *x = x.max(-1.0);
    }
    SimilarityMatrix::from_dense(n, data)
}

/// Row-major `n_tags x k` latent coordinates.
fn lsi_latent(tr: &TagResourceMatrix, cfg: &LsiConfig) -> Result<Vec<f64>> {
    let (nt, nr) = (tr.n_tags(), tr.n_resources());
    let tags = Csr::tag_rows(tr);
    let resources = Csr::resource_rows(tr);
    let width = (cfg.k + OVERSAMPLE).min(nt.min(nr));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let omega = DMatrix::from_fn(nr, width, |_, _| rng.random_range(-1.0..1.0));
    let mut q = orthonormal(spmm(&tags, &omega));
    for _ in 0..cfg.power_iterations {
        let z = orthonormal(spmm(&resources, &q));
        q = orthonormal(spmm(&tags, &z));
    }
    // B = Q^T TR, so B B^T = (TR^T Q)^T (TR^T Q).
    let bt = spmm(&resources, &q);
    let eig = SymmetricEigen::new(bt.transpose() * &bt);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    // Rows of U_k Sigma_k = Q W_k diag(sqrt(lambda)); W_k are eigenvectors of B B^T.
    let mut basis = DMatrix::<f64>::zeros(width, cfg.k);
    for (c, &src) in order.iter().take(cfg.k).enumerate() {
        let sigma = eig.eigenvalues[src].max(0.0).sqrt();
        basis.set_column(c, &(eig.eigenvectors.column(src) * sigma));
    }
    let coords = &q * basis;
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(invalid("lsi", "non-finite latent coordinates"));
    }
    let mut latent = Vec::with_capacity(nt * cfg.k);
    for i in 0..nt {
        latent.extend(coords.row(i).iter().copied());
    }
    Ok(latent)
}

/// Sparse `A` (rows x cols) times dense `X` (cols x w).
fn spmm(a: &Csr, x: &DMatrix<f64>) -> DMatrix<f64> {
    let w = x.ncols();
    let mut out = vec![0.0; a.rows * w];
    par::fill_rows(&mut out, w, |i, row| {
        let (idx, val) = a.row(i);
        for (&k, &v) in idx.iter().zip(val) {
            for (c, o) in row.iter_mut().enumerate() {
                *o += v * x[(k, c)];
            }
        }
    });
    DMatrix::from_row_slice(a.rows, w, &out)
}

fn orthonormal(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Clamps negative latent similarities to 0, the form expansion consumes.
pub fn clamp_negative(m: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    let n = m.dim();
    let pairs = m
        .upper_pairs()
        .filter(|&(a, b, s)| a != b && s > 0.0)
        .collect::<Vec<_>>();
    SimilarityMatrix::from_pairs(n, m.threshold(), pairs)
}
