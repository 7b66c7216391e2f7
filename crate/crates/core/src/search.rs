//! TF-IDF resource ranking over an inverted tag index.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use crate::corpus::{Interner, TagResourceMatrix};
use crate::error::{invalid, Error, Result};
use crate::expand::Expander;
use crate::simcore::{format_sig, SimilarityMatrix};

/// `TR[t, r] * IRF(t)`; zero when the tag does not label the resource.
pub fn tfidf_weight(t: usize, r: usize, tr: &TagResourceMatrix) -> Result<f64> {
    if r >= tr.n_resources() {
        return Err(Error::IndexOutOfRange {
            kind: "resource",
            index: r,
            size: tr.n_resources(),
        });
    }
    if t >= tr.n_tags() {
        return Err(Error::UnknownTag(format!("#{t}")));
    }
    let count = tr.get(t, r);
    if count == 0 {
        return Ok(0.0);
    }
    Ok(f64::from(count) * tr.inverse_resource_frequency(t)?)
}

/// Tag to `(resource, tf-idf)` postings, resources ascending.
#[derive(Debug, Clone)]
pub struct SearchIndex {
    postings: Vec<Vec<(usize, f64)>>,
    n_resources: usize,
}

impl SearchIndex {
    pub fn new(tr: &TagResourceMatrix) -> Self {
        let postings = (0..tr.n_tags())
            .map(|t| match tr.inverse_resource_frequency(t) {
                Ok(irf) => tr.row(t).map(|(r, c)| (r, f64::from(c) * irf)).collect(),
                Err(_) => Vec::new(),
            })
            .collect();
        Self {
            postings,
            n_resources: tr.n_resources(),
        }
    }

    pub fn n_tags(&self) -> usize {
        self.postings.len()
    }

    /// Top-`q` resources for an already expanded tag set.
    pub fn rank(&self, tags: &BTreeSet<usize>, q: usize) -> Result<Vec<(usize, f64)>> {
        if q == 0 {
            return Err(invalid("q", "must be at least 1"));
        }
        let mut relevance = vec![0.0; self.n_resources];
        let mut seen = vec![false; self.n_resources];
        let mut touched = Vec::new();
        for &t in tags {
            let postings = self
                .postings
                .get(t)
                .ok_or_else(|| Error::UnknownTag(format!("#{t}")))?;
            for &(r, w) in postings {
                if !seen[r] {
                    seen[r] = true;
                    touched.push(r);
                }
                relevance[r] += w;
            }
        }
        let mut ranked: Vec<(usize, f64)> = touched
            .into_iter()
            .filter(|&r| relevance[r] > 0.0)
            .map(|r| (r, relevance[r]))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(q);
        Ok(ranked)
    }

    /// Expands `tags` with `expander` when given, then ranks.
    pub fn query(
        &self,
        tags: &BTreeSet<usize>,
        q: usize,
        expander: Option<&Expander<'_>>,
    ) -> Result<QueryResult> {
        if tags.is_empty() {
            return Err(invalid("tags", "query must contain at least one tag"));
        }
        let expanded_query = match expander {
            Some(e) => e.expand(tags, None)?.expanded(),
            None => tags.clone(),
        };
        let ranked = self.rank(&expanded_query, q)?;
        Ok(QueryResult {
            ranked,
            q,
            expanded_query,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    /// `(resource, relevance)` by descending relevance, ties by index.
    pub ranked: Vec<(usize, f64)>,
    pub q: usize,
    pub expanded_query: BTreeSet<usize>,
}

impl QueryResult {
    pub fn contains(&self, resource: usize) -> bool {
        self.ranked.iter().any(|&(r, _)| r == resource)
    }

    /// Writes `rank<TAB>resource_id<TAB>relevance` lines, ranks from 1.
    pub fn write_tsv<W: Write>(&self, resources: &Interner, mut out: W) -> Result<()> {
        for (i, &(r, rel)) in self.ranked.iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{}",
                i + 1,
                resources.name(r),
                format_sig(rel, 9)
            )?;
        }
        Ok(())
    }
}

/// Ranks resources for `tags`, expanding the set first when `st` is given.
pub fn rank_resources(
    tags: &BTreeSet<usize>,
    q: usize,
    tr: &TagResourceMatrix,
    st: Option<&SimilarityMatrix>,
) -> Result<QueryResult> {
    let index = SearchIndex::new(tr);
    match st {
        Some(st) => index.query(tags, q, Some(&Expander::new(st, tr)?)),
        None => index.query(tags, q, None),
    }
}
