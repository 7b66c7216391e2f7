//! Tag-set expansion and bookmark enrichment.
//!
//! A candidate tag `t_i` scores `st(t_i, t_j) * ln(count(t_i)) * IRF(t_i)`
//! against each member `t_j` of the set; its total score is the sum over the
//! set. The `k` best candidates with a positive total are added.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{Bookmark, TagResourceMatrix};
use crate::error::{Error, Result};
use crate::par;
use crate::simcore::SimilarityMatrix;

/// Number of tags added to a set of size `n`: `ceil(n / 2)` above 6,
/// otherwise 3.
pub fn expansion_size(n: usize) -> Result<usize> {
    match n {
        0 => Err(crate::error::invalid("n", "tag set must be nonempty")),
        1..=6 => Ok(3),
        _ => Ok(n.div_ceil(2)),
    }
}

/// `ln(count(t)) * IRF(t)` for every tag; zero for unused tags.
#[derive(Debug, Clone, PartialEq)]
pub struct TagWeights(Vec<f64>);

impl TagWeights {
    pub fn new(tr: &TagResourceMatrix) -> Self {
        Self(
            (0..tr.n_tags())
                .map(|t| popularity(tr, t).unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn get(&self, tag: usize) -> f64 {
        self.0[tag]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn popularity(tr: &TagResourceMatrix, tag: usize) -> Result<f64> {
    let count = tr.tag_count(tag)?;
    if count == 0 {
        return Ok(0.0);
    }
    Ok((count as f64).ln() * tr.inverse_resource_frequency(tag)?)
}

fn check_tag(tag: usize, n: usize) -> Result<()> {
    if tag >= n {
        return Err(Error::UnknownTag(format!("#{tag}")));
    }
    Ok(())
}

/// Score of candidate `t_i` against set member `t_j`. Negative similarities
/// count as 0.
pub fn pair_score(
    t_i: usize,
    t_j: usize,
    st: &SimilarityMatrix,
    tr: &TagResourceMatrix,
) -> Result<f64> {
    check_tag(t_i, tr.n_tags())?;
    check_tag(t_j, tr.n_tags())?;
    Ok(st.get(t_i, t_j).max(0.0) * popularity(tr, t_i)?)
}

/// Sum of [`pair_score`] over the set.
pub fn total_score(
    t_i: usize,
    set: &BTreeSet<usize>,
    st: &SimilarityMatrix,
    tr: &TagResourceMatrix,
) -> Result<f64> {
    set.iter().map(|&t_j| pair_score(t_i, t_j, st, tr)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionResult {
    pub original: BTreeSet<usize>,
    /// Added tags by descending score, ties by ascending index.
    pub added: Vec<(usize, f64)>,
    pub k_used: usize,
}

impl ExpansionResult {
    /// Original tags together with the added ones.
    pub fn expanded(&self) -> BTreeSet<usize> {
        let mut all = self.original.clone();
        all.extend(self.added.iter().map(|&(t, _)| t));
        all
    }
}

/// Expansion against a fixed similarity matrix and tag-weight table.
#[derive(Debug, Clone)]
pub struct Expander<'a> {
    st: &'a SimilarityMatrix,
    weights: TagWeights,
}

impl<'a> Expander<'a> {
    pub fn new(st: &'a SimilarityMatrix, tr: &TagResourceMatrix) -> Result<Self> {
        if st.dim() != tr.n_tags() {
            return Err(Error::DimensionMismatch {
                expected: tr.n_tags(),
                found: st.dim(),
            });
        }
        Ok(Self {
            st,
            weights: TagWeights::new(tr),
        })
    }

    pub fn weights(&self) -> &TagWeights {
        &self.weights
    }

    /// Top-`k` expansion of `set`; `k` defaults to [`expansion_size`].
    pub fn expand(
        &self,
        set: &BTreeSet<usize>,
        k_override: Option<usize>,
    ) -> Result<ExpansionResult> {
        let k = match k_override {
            Some(k) => k,
            None => expansion_size(set.len())?,
        };
        if set.is_empty() {
            return Err(crate::error::invalid("tags", "tag set must be nonempty"));
        }
        let n = self.weights.len();
        for &t in set {
            check_tag(t, n)?;
        }
        let mut totals: BTreeMap<usize, f64> = BTreeMap::new();
        for &t_j in set {
            for (t_i, s) in self.st.row(t_j) {
                if s > 0.0 && !set.contains(&t_i) {
                    *totals.entry(t_i).or_insert(0.0) += s * self.weights.get(t_i);
                }
            }
        }
        let mut added: Vec<(usize, f64)> = totals.into_iter().filter(|&(_, sc)| sc > 0.0).collect();
        added.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        added.truncate(k);
        Ok(ExpansionResult {
            original: set.clone(),
            added,
            k_used: k,
        })
    }

    /// Unions each bookmark's tags with its expansion. Order is preserved.
    pub fn enrich(&self, bookmarks: &[Bookmark]) -> Result<Vec<Bookmark>> {
        par::map_slice(bookmarks, |b| {
            let exp = self.expand(&b.tags, None)?;
            Ok(Bookmark {
                user: b.user,
                resource: b.resource,
                tags: exp.expanded(),
            })
        })
        .into_iter()
        .collect()
    }
}

/// One-shot form of [`Expander::expand`].
pub fn expand_tag_set(
    set: &BTreeSet<usize>,
    st: &SimilarityMatrix,
    tr: &TagResourceMatrix,
    k_override: Option<usize>,
) -> Result<ExpansionResult> {
    Expander::new(st, tr)?.expand(set, k_override)
}

/// One-shot form of [`Expander::enrich`].
pub fn enrich_bookmarks(
    bookmarks: &[Bookmark],
    st: &SimilarityMatrix,
    tr: &TagResourceMatrix,
) -> Result<Vec<Bookmark>> {
    Expander::new(st, tr)?.enrich(bookmarks)
}
