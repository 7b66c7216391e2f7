//! Retrieved-ratio experiments and synthetic corpora.
//!
//! Each repeat splits the bookmarks into train and test, computes every
//! method's tag similarities on the train split alone, enriches the train
//! bookmarks and then asks, for every test bookmark, whether its resource
//! shows up in the top `q` results for its (expanded) tags.

mod report;
mod synth;

pub use report::{EvalReport, ReportRow};
pub use synth::{generate_synthetic, SynthSpec};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    clamp_negative, cosine_similarity_matrix, lsi_similarity_matrix, simrank_compute, LsiConfig,
    SimRankConfig,
};
use crate::corpus::{
    group_bookmarks, tag_resource_matrix_from_bookmarks, Bookmark, Folksonomy, TagResourceMatrix,
};
use crate::error::{invalid, Error, Result};
use crate::expand::Expander;
use crate::par;
use crate::search::SearchIndex;
use crate::simcore::{compute_similarities, EngineConfig, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.9,
            repeats: 10,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(invalid(
                "train_fraction",
                format!("must lie in (0,1), got {}", self.train_fraction),
            ));
        }
        if self.repeats == 0 {
            return Err(invalid("repeats", "must be at least 1"));
        }
        Ok(())
    }
}

/// Seeded random train/test partition for one repeat.
///
/// The train part holds `round(train_fraction * N)` bookmarks, kept within
/// `1..N` so neither side is empty. Both parts keep input order.
pub fn split_bookmarks(
    bookmarks: &[Bookmark],
    spec: &SplitSpec,
    repeat_index: usize,
) -> Result<(Vec<Bookmark>, Vec<Bookmark>)> {
    spec.validate()?;
    let n = bookmarks.len();
    if n < 2 {
        return Err(Error::TooFewBookmarks(n));
    }
    let n_train = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(repeat_index as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut in_train = vec![false; n];
    for &i in &order[..n_train] {
        in_train[i] = true;
    }
    let (mut train, mut test) = (Vec::with_capacity(n_train), Vec::with_capacity(n - n_train));
    for (b, keep) in bookmarks.iter().zip(in_train) {
        if keep {
            train.push(b.clone());
        } else {
            test.push(b.clone());
        }
    }
    Ok((train, test))
}

/// Similarity method whose expansions feed retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    None,
    Cosine,
    Simrank,
    Lsi,
    Mrs,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::None,
        Method::Cosine,
        Method::Simrank,
        Method::Lsi,
        Method::Mrs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Cosine => "cosine",
            Method::Simrank => "simrank",
            Method::Lsi => "lsi",
            Method::Mrs => "mrs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                invalid(
                    "method",
                    format!("expected one of none, cosine, simrank, lsi, mrs; got {s:?}"),
                )
            })
    }
}

/// Parameters of every similarity method.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub engine: EngineConfig,
    pub simrank: SimRankConfig,
    pub lsi: LsiConfig,
}

/// Tag similarities of `method` on `tr`, in the form expansion consumes.
/// Returns `None` for [`Method::None`].
pub fn tag_similarity(
    method: Method,
    tr: &TagResourceMatrix,
    cfg: &MethodConfig,
) -> Result<Option<SimilarityMatrix>> {
    let st = match method {
        Method::None => return Ok(None),
        Method::Cosine => cosine_similarity_matrix(tr)?,
        Method::Simrank => simrank_compute(tr, &cfg.simrank)?.0,
        Method::Lsi => {
            let lsi = LsiConfig {
                k: cfg.lsi.k.min(tr.n_tags().min(tr.n_resources())),
                ..cfg.lsi
            };
            clamp_negative(&lsi_similarity_matrix(tr, &lsi)?)?
        }
        Method::Mrs => compute_similarities(tr, &cfg.engine)?.st,
    };
    Ok(Some(st))
}

/// Hits, evaluated queries and skipped queries for one `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RatioOutcome {
    pub hits: usize,
    pub evaluated: usize,
    pub skipped: usize,
}

impl RatioOutcome {
    pub fn ratio(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            self.hits as f64 / self.evaluated as f64
        }
    }
}

/// Test bookmarks reduced to the train vocabulary. Bookmarks left without
/// tags are dropped and counted.
#[derive(Debug, Clone)]
pub struct QuerySet {
    pub queries: Vec<(BTreeSet<usize>, usize)>,
    pub skipped: usize,
}

impl QuerySet {
    pub fn new(train_tr: &TagResourceMatrix, test: &[Bookmark]) -> Self {
        let mut queries = Vec::with_capacity(test.len());
        let mut skipped = 0;
        for b in test {
            let tags: BTreeSet<usize> = b
                .tags
                .iter()
                .copied()
                .filter(|&t| t < train_tr.n_tags() && train_tr.resource_frequency(t) > 0)
                .collect();
            if tags.is_empty() {
                skipped += 1;
            } else {
                queries.push((tags, b.resource));
            }
        }
        Self { queries, skipped }
    }

    /// 0-based rank of each query's resource within the top `q_max`.
    fn hit_ranks(
        &self,
        index: &SearchIndex,
        expander: Option<&Expander<'_>>,
        q_max: usize,
    ) -> Result<Vec<Option<usize>>> {
        par::map_slice(&self.queries, |(tags, target)| {
            let res = index.query(tags, q_max, expander)?;
            Ok(res.ranked.iter().position(|&(r, _)| r == *target))
        })
        .into_iter()
        .collect()
    }

    /// Outcomes for each `q` in `qs`, from a single ranking per query.
    pub fn evaluate(
        &self,
        index: &SearchIndex,
        expander: Option<&Expander<'_>>,
        qs: &[usize],
    ) -> Result<Vec<RatioOutcome>> {
        if self.queries.is_empty() {
            return Err(Error::NoEvaluableQueries(self.skipped));
        }
        let q_max = qs.iter().copied().max().unwrap_or(0);
        if qs.contains(&0) || q_max == 0 {
            return Err(invalid("q", "must be at least 1"));
        }
        let ranks = self.hit_ranks(index, expander, q_max)?;
        Ok(qs
            .iter()
            .map(|&q| RatioOutcome {
                hits: ranks.iter().filter(|r| r.is_some_and(|p| p < q)).count(),
                evaluated: self.queries.len(),
                skipped: self.skipped,
            })
            .collect())
    }
}

/// Fraction of test bookmarks whose resource is among the top `q` results
/// when querying the index built from `index_tr` with the bookmark's tags,
/// expanded by `expander` when given.
pub fn retrieved_ratio(
    train_tr: &TagResourceMatrix,
    index_tr: &TagResourceMatrix,
    test: &[Bookmark],
    expander: Option<&Expander<'_>>,
    q: usize,
) -> Result<RatioOutcome> {
    let queries = QuerySet::new(train_tr, test);
    let index = SearchIndex::new(index_tr);
    Ok(queries.evaluate(&index, expander, &[q])?[0])
}

/// Outcome of one repeat: `(method, enriched) -> per-q outcomes`.
type RepeatResult = Vec<(Method, bool, Vec<RatioOutcome>)>;

fn run_repeat(
    f: &Folksonomy,
    bookmarks: &[Bookmark],
    spec: &SplitSpec,
    repeat: usize,
    methods: &[Method],
    qs: &[usize],
    cfg: &MethodConfig,
) -> Result<RepeatResult> {
    let (train, test) = split_bookmarks(bookmarks, spec, repeat)?;
    let (nt, nr) = (f.n_tags(), f.n_resources());
    let train_tr = tag_resource_matrix_from_bookmarks(nt, nr, &train)?;
    let queries = QuerySet::new(&train_tr, &test);
    let plain = SearchIndex::new(&train_tr);
    let mut out = Vec::new();
    for &method in methods {
        let Some(st) = tag_similarity(method, &train_tr, cfg)? else {
            out.push((method, false, queries.evaluate(&plain, None, qs)?));
            continue;
        };
        let expander = Expander::new(&st, &train_tr)?;
        let enriched = expander.enrich(&train)?;
        let enriched_tr = tag_resource_matrix_from_bookmarks(nt, nr, &enriched)?;
        let enriched_index = SearchIndex::new(&enriched_tr);
        out.push((
            method,
            true,
            queries.evaluate(&enriched_index, Some(&expander), qs)?,
        ));
        out.push((
            method,
            false,
            queries.evaluate(&plain, Some(&expander), qs)?,
        ));
        info!("repeat {repeat}: {method} done");
    }
    Ok(out)
}

/// Runs `spec.repeats` split/enrich/query rounds and averages the ratios.
///
/// For each method other than `none` two rows are reported: `enriched`
/// (enriched train index, expanded queries) and not enriched (original
/// index, expanded queries). `none` has only the plain row.
pub fn run_retrieval_experiment(
    f: &Folksonomy,
    spec: &SplitSpec,
    methods: &[Method],
    qs: &[usize],
    cfg: &MethodConfig,
) -> Result<EvalReport> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(invalid("methods", "at least one method is required"));
    }
    if qs.is_empty() || qs.contains(&0) {
        return Err(invalid("q", "need at least one q, each at least 1"));
    }
    let bookmarks = group_bookmarks(f);
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let mut qs = qs.to_vec();
    qs.sort_unstable();
    qs.dedup();

    let repeats: Vec<RepeatResult> = par::map_range(spec.repeats, |rep| {
        run_repeat(f, &bookmarks, spec, rep, &methods, &qs, cfg)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (slot, &(method, enriched, _)) in repeats[0].iter().enumerate() {
        for (qi, &q) in qs.iter().enumerate() {
            let outcomes: Vec<RatioOutcome> = repeats.iter().map(|r| r[slot].2[qi]).collect();
            rows.push(ReportRow::from_outcomes(method, q, enriched, &outcomes));
        }
    }
    Ok(EvalReport {
        n_bookmarks: bookmarks.len(),
        split: *spec,
        rows,
    })
}
