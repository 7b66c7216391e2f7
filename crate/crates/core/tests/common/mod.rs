#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tagsim::corpus::TagResourceMatrix;
use tagsim::simcore::SimilarityMatrix;

pub const PSIS: [f64; 4] = [0.0, 0.3, 0.7, 1.0];

/// A random sparse count matrix of at most 30 tags by 40 resources with
/// density at most 0.2.
pub fn random_instance(rng: &mut ChaCha8Rng) -> TagResourceMatrix {
    let nt = rng.random_range(2..=30);
    let nr = rng.random_range(2..=40);
    let density = rng.random_range(0.02..=0.2);
    let mut entries = Vec::new();
    for t in 0..nt {
        for r in 0..nr {
            if rng.random::<f64>() < density {
                entries.push((t, r, rng.random_range(1..=5)));
            }
        }
    }
    TagResourceMatrix::from_triplets(nt, nr, entries).unwrap()
}

pub fn instances(seed: u64, n: usize) -> Vec<TagResourceMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_instance(&mut rng)).collect()
}

pub fn dense(rows: &[&[u32]]) -> TagResourceMatrix {
    TagResourceMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Cosine of two tag rows straight from the counts; an empty row is similar
/// only to itself.
pub fn literal_cosine(tr: &TagResourceMatrix, a: usize, b: usize) -> f64 {
    if a == b {
        return 1.0;
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for r in 0..tr.n_resources() {
        let (x, y) = (tr.get(a, r) as f64, tr.get(b, r) as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

pub fn max_abs_diff(a: &SimilarityMatrix, b: &SimilarityMatrix) -> f64 {
    a.to_dense()
        .iter()
        .zip(b.to_dense())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn report(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!(
        "criterion {id} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}
