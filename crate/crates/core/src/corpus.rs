//! Folksonomy ingestion, the tag-resource count matrix and corpus statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Interned string table. Indices follow first-insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Interner {
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.lookup.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.lookup.insert(name.to_owned(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A single tag assignment: `user` labelled `resource` with `tag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub user: usize,
    pub resource: usize,
    pub tag: usize,
}

/// Users, resources and tags linked by a set of tag assignments.
///
/// Identifiers are interned in order of first appearance and the assignment
/// list keeps its first-insertion order with duplicates removed, so two
/// folksonomies built from the same stream compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Folksonomy {
    users: Interner,
    resources: Interner,
    tags: Interner,
    assignments: Vec<Assignment>,
    seen: HashSet<Assignment>,
}

impl Folksonomy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one assignment, interning its identifiers. Returns `false` when
    /// the triple was already present.
    pub fn add(&mut self, user: &str, resource: &str, tag: &str) -> bool {
        let a = Assignment {
            user: self.users.intern(user),
            resource: self.resources.intern(resource),
            tag: self.tags.intern(tag),
        };
        if self.seen.insert(a) {
            self.assignments.push(a);
            true
        } else {
            false
        }
    }

    pub fn users(&self) -> &Interner {
        &self.users
    }

    pub fn resources(&self) -> &Interner {
        &self.resources
    }

    pub fn tags(&self) -> &Interner {
        &self.tags
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn n_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Writes the assignment set as `user<TAB>resource<TAB>tag` lines.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for a in &self.assignments {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.users.name(a.user),
                self.resources.name(a.resource),
                self.tags.name(a.tag)
            )?;
        }
        Ok(())
    }

    /// Rebuilds a folksonomy from bookmarks whose indices refer to `self`.
    /// Interning restarts in bookmark order.
    pub fn from_bookmarks(&self, bookmarks: &[Bookmark]) -> Folksonomy {
        let mut f = Folksonomy::new();
        for b in bookmarks {
            for &t in &b.tags {
                f.add(
                    self.users.name(b.user),
                    self.resources.name(b.resource),
                    self.tags.name(t),
                );
            }
        }
        f
    }
}

/// Parses an assignment stream: `user<TAB>resource<TAB>tag[<TAB>...]` per
/// line. Lines starting with `#` and blank lines are skipped; fields after
/// the third are ignored. Tags are compared byte-exact.
pub fn ingest_assignments<R: BufRead>(reader: R) -> Result<Folksonomy> {
    let mut f = Folksonomy::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(u), Some(r), Some(t)) => {
                f.add(u, r, t);
            }
            _ => {
                return Err(Error::MalformedLine {
                    line: i + 1,
                    found: line.split('\t').count(),
                })
            }
        }
    }
    if f.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(f)
}

/// Sparse `n_tags x n_resources` count matrix stored in both row-major and
/// column-major compressed form.
#[derive(Debug, Clone, PartialEq)]
pub struct TagResourceMatrix {
    n_tags: usize,
    n_resources: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<u32>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<u32>,
}

impl TagResourceMatrix {
    /// Builds the matrix from `(tag, resource, count)` triples. Counts of
    /// repeated coordinates are summed; zero counts are dropped.
    pub fn from_triplets<I>(n_tags: usize, n_resources: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut cells: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (t, r, c) in entries {
            if t >= n_tags {
                return Err(Error::IndexOutOfRange {
                    kind: "tag",
                    index: t,
                    size: n_tags,
                });
            }
            if r >= n_resources {
                return Err(Error::IndexOutOfRange {
                    kind: "resource",
                    index: r,
                    size: n_resources,
                });
            }
            if c > 0 {
                *cells.entry((t, r)).or_insert(0) += c;
            }
        }

        let mut row_ptr = vec![0usize; n_tags + 1];
        let mut col_ptr = vec![0usize; n_resources + 1];
        for &(t, r) in cells.keys() {
            row_ptr[t + 1] += 1;
            col_ptr[r + 1] += 1;
        }
        for i in 0..n_tags {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..n_resources {
            col_ptr[j + 1] += col_ptr[j];
        }

        let nnz = cells.len();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut row_val = Vec::with_capacity(nnz);
        let mut col_idx = vec![0usize; nnz];
        let mut col_val = vec![0u32; nnz];
        let mut col_fill = col_ptr.clone();
        // BTreeMap iterates by (tag, resource), so rows come out sorted and
        // each column is filled in ascending tag order.
        for (&(t, r), &c) in &cells {
            row_idx.push(r);
            row_val.push(c);
            let slot = col_fill[r];
            col_idx[slot] = t;
            col_val[slot] = c;
            col_fill[r] += 1;
        }

        Ok(Self {
            n_tags,
            n_resources,
            row_ptr,
            row_idx,
            row_val,
            col_ptr,
            col_idx,
            col_val,
        })
    }

    /// Builds a matrix from a dense row-major table of counts.
    pub fn from_dense(rows: &[Vec<u32>]) -> Result<Self> {
        let n_tags = rows.len();
        let n_resources = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (t, row) in rows.iter().enumerate() {
            if row.len() != n_resources {
                return Err(Error::DimensionMismatch {
                    expected: n_resources,
                    found: row.len(),
                });
            }
            for (r, &c) in row.iter().enumerate() {
                entries.push((t, r, c));
            }
        }
        Self::from_triplets(n_tags, n_resources, entries)
    }

    pub fn n_tags(&self) -> usize {
        self.n_tags
    }

    pub fn n_resources(&self) -> usize {
        self.n_resources
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Count at `(tag, resource)`, zero when absent or out of range.
    pub fn get(&self, tag: usize, resource: usize) -> u32 {
        if tag >= self.n_tags {
            return 0;
        }
        let (lo, hi) = (self.row_ptr[tag], self.row_ptr[tag + 1]);
        match self.row_idx[lo..hi].binary_search(&resource) {
            Ok(p) => self.row_val[lo + p],
            Err(_) => 0,
        }
    }

    /// Nonzero `(resource, count)` pairs of a tag row, ascending by resource.
    pub fn row(&self, tag: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let (lo, hi) = (self.row_ptr[tag], self.row_ptr[tag + 1]);
        self.row_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.row_val[lo..hi].iter().copied())
    }

    /// Nonzero `(tag, count)` pairs of a resource column, ascending by tag.
    pub fn col(&self, resource: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let (lo, hi) = (self.col_ptr[resource], self.col_ptr[resource + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.col_val[lo..hi].iter().copied())
    }

    pub(crate) fn row_parts(&self, tag: usize) -> (&[usize], &[u32]) {
        let (lo, hi) = (self.row_ptr[tag], self.row_ptr[tag + 1]);
        (&self.row_idx[lo..hi], &self.row_val[lo..hi])
    }

    pub(crate) fn col_parts(&self, resource: usize) -> (&[usize], &[u32]) {
        let (lo, hi) = (self.col_ptr[resource], self.col_ptr[resource + 1]);
        (&self.col_idx[lo..hi], &self.col_val[lo..hi])
    }

    /// Number of distinct resources a tag labels.
    pub fn resource_frequency(&self, tag: usize) -> usize {
        self.row_ptr[tag + 1] - self.row_ptr[tag]
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.row_val.iter().map(|&c| u64::from(c)).sum()
    }

    /// Number of times a tag appears in the folksonomy (its row sum).
    pub fn tag_count(&self, tag: usize) -> Result<u64> {
        self.check_tag(tag)?;
        Ok(self.row(tag).map(|(_, c)| u64::from(c)).sum())
    }

    /// `ln(n_resources / df)` where `df` is the number of resources the tag
    /// labels.
    pub fn inverse_resource_frequency(&self, tag: usize) -> Result<f64> {
        self.check_tag(tag)?;
        let df = self.resource_frequency(tag);
        if df == 0 {
            return Err(Error::TagUnused(tag));
        }
        Ok((self.n_resources as f64 / df as f64).ln())
    }

    fn check_tag(&self, tag: usize) -> Result<()> {
        if tag >= self.n_tags {
            return Err(Error::IndexOutOfRange {
                kind: "tag",
                index: tag,
                size: self.n_tags,
            });
        }
        Ok(())
    }
}

/// `TR[t, r]` is the number of distinct users who labelled `r` with `t`.
pub fn build_tag_resource_matrix(f: &Folksonomy) -> Result<TagResourceMatrix> {
    if f.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    TagResourceMatrix::from_triplets(
        f.n_tags(),
        f.n_resources(),
        f.assignments().iter().map(|a| (a.tag, a.resource, 1)),
    )
}

/// Builds `TR` from bookmarks whose indices refer to a parent folksonomy
/// with the given dimensions. Unused tags and resources keep empty rows.
pub fn tag_resource_matrix_from_bookmarks(
    n_tags: usize,
    n_resources: usize,
    bookmarks: &[Bookmark],
) -> Result<TagResourceMatrix> {
    TagResourceMatrix::from_triplets(
        n_tags,
        n_resources,
        bookmarks
            .iter()
            .flat_map(|b| b.tags.iter().map(move |&t| (t, b.resource, 1))),
    )
}

/// One user's tags on one resource.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bookmark {
    pub user: usize,
    pub resource: usize,
    pub tags: BTreeSet<usize>,
}

/// Groups assignments by `(user, resource)`, ordered by user then resource.
pub fn group_bookmarks(f: &Folksonomy) -> Vec<Bookmark> {
    let mut grouped: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for a in f.assignments() {
        grouped
            .entry((a.user, a.resource))
            .or_default()
            .insert(a.tag);
    }
    grouped
        .into_iter()
        .map(|((user, resource), tags)| Bookmark {
            user,
            resource,
            tags,
        })
        .collect()
}

/// Counts bucketed as 1, 2, 3, 4 and 5-or-more. Zero values are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub buckets: [u64; 5],
}

impl Histogram {
    fn record(&mut self, value: u64) {
        if value > 0 {
            self.buckets[(value.min(5) - 1) as usize] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }

    /// Fraction of recorded values strictly below `bound` (1..=5).
    pub fn fraction_below(&self, bound: u64) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let below: u64 = self.buckets[..(bound.clamp(1, 5) - 1) as usize]
            .iter()
            .sum();
        below as f64 / total as f64
    }
}

/// Size summary and usage distributions of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_users: usize,
    pub n_resources: usize,
    pub n_tags: usize,
    pub n_assignments: usize,
    /// Distinct tags per resource.
    pub tags_per_resource: Histogram,
    /// Total uses per tag.
    pub uses_per_tag: Histogram,
}

pub fn corpus_stats(f: &Folksonomy, tr: &TagResourceMatrix) -> CorpusStats {
    let mut tags_per_resource = Histogram::default();
    for r in 0..tr.n_resources() {
        tags_per_resource.record(tr.col(r).count() as u64);
    }
    let mut uses_per_tag = Histogram::default();
    for t in 0..tr.n_tags() {
        uses_per_tag.record(tr.row(t).map(|(_, c)| u64::from(c)).sum());
    }
    CorpusStats {
        n_users: f.n_users(),
        n_resources: f.n_resources(),
        n_tags: f.n_tags(),
        n_assignments: f.assignments().len(),
        tags_per_resource,
        uses_per_tag,
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "users\t{}", self.n_users)?;
        writeln!(f, "resources\t{}", self.n_resources)?;
        writeln!(f, "tags\t{}", self.n_tags)?;
        writeln!(f, "assignments\t{}", self.n_assignments)?;
        let labels = ["1", "2", "3", "4", ">=5"];
        for (name, h) in [
            ("tags_per_resource", &self.tags_per_resource),
            ("uses_per_tag", &self.uses_per_tag),
        ] {
            for (label, n) in labels.iter().zip(h.buckets) {
                writeln!(f, "{name}[{label}]\t{n}")?;
            }
        }
        Ok(())
    }
}
