use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Symmetric similarity scores with a unit diagonal.
///
/// Iteration works on the dense form; results handed back to callers are
/// usually sparsified, keeping only off-diagonal scores `>= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    threshold: f64,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Full row-major `n x n` table.
    Dense(Vec<f64>),
    /// Per-row `(column, score)` lists in ascending column order, both
    /// triangles and the diagonal included.
    Sparse(Vec<Vec<(usize, f64)>>),
}

impl SimilarityMatrix {
    /// Every item similar only to itself.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            n,
            threshold: 0.0,
            storage: Storage::Sparse((0..n).map(|i| vec![(i, 1.0)]).collect()),
        })
    }

    /// Wraps a dense row-major table. The caller guarantees symmetry.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self {
            n,
            threshold: 0.0,
            storage: Storage::Dense(data),
        })
    }

    /// Builds a sparse matrix from upper-triangle pairs `(a, b, score)` with
    /// `a <= b`. The diagonal is set to 1 regardless of the input.
    pub fn from_pairs<I>(n: usize, threshold: f64, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (a, b, s) in pairs {
            for idx in [a, b] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange {
                        kind: "similarity",
                        index: idx,
                        size: n,
                    });
                }
            }
            if a != b && s != 0.0 {
                rows[a].insert(b, s);
                rows[b].insert(a, s);
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.insert(i, 1.0);
        }
        Ok(Self {
            n,
            threshold,
            storage: Storage::Sparse(rows.into_iter().map(|r| r.into_iter().collect()).collect()),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Threshold the matrix was sparsified with (0 for dense matrices).
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Score of `(a, b)`; zero when not stored.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[a * self.n + b],
            Storage::Sparse(rows) => rows[a]
                .binary_search_by_key(&b, |&(j, _)| j)
                .map_or(0.0, |p| rows[a][p].1),
        }
    }

    /// Nonzero `(column, score)` entries of a row in ascending column order.
    pub fn row(&self, a: usize) -> RowIter<'_> {
        match &self.storage {
            Storage::Dense(d) => RowIter::Dense {
                row: &d[a * self.n..(a + 1) * self.n],
                pos: 0,
            },
            Storage::Sparse(rows) => RowIter::Sparse(rows[a].iter()),
        }
    }

    /// Stored upper-triangle entries `(a, b, score)` with `a <= b`, row by row.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |a| {
            self.row(a)
                .filter(move |&(b, _)| b >= a)
                .map(move |(b, s)| (a, b, s))
        })
    }

    /// Number of stored upper-triangle entries, diagonal included.
    pub fn stored_pairs(&self) -> usize {
        self.upper_pairs().count()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse(rows) => {
                let mut d = vec![0.0; self.n * self.n];
                for (a, row) in rows.iter().enumerate() {
                    for &(b, s) in row {
                        d[a * self.n + b] = s;
                    }
                }
                d
            }
        }
    }

    /// Drops off-diagonal scores below `tau`; the diagonal is always kept.
    pub fn sparsify(&self, tau: f64) -> SimilarityMatrix {
        let rows = (0..self.n)
            .map(|a| {
                self.row(a)
                    .filter(|&(b, s)| b == a || s >= tau)
                    .collect::<Vec<_>>()
            })
            .collect();
        SimilarityMatrix {
            n: self.n,
            threshold: tau,
            storage: Storage::Sparse(rows),
        }
    }

    /// Writes the upper triangle as `a<TAB>b<TAB>score` lines preceded by
    /// `# key=value` header lines. Scores carry 9 significant digits.
    pub fn write_tsv<W: Write>(&self, header: &[(&str, String)], mut out: W) -> Result<()> {
        writeln!(out, "# dim={}", self.n)?;
        for (k, v) in header {
            writeln!(out, "# {k}={v}")?;
        }
        for (a, b, s) in self.upper_pairs() {
            writeln!(out, "{a}\t{b}\t{}", format_sig(s, 9))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`SimilarityMatrix::write_tsv`],
    /// returning the matrix and its header fields.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<(Self, BTreeMap<String, String>)> {
        let mut header = BTreeMap::new();
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    header.insert(k.trim().to_owned(), v.trim().to_owned());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 3 {
                return Err(Error::Parse {
                    line: lineno,
                    reason: "expected a<TAB>b<TAB>score".into(),
                });
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno,
                    reason: e.to_string(),
                })
            };
            let score = fields[2].parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
            pairs.push((parse_idx(fields[0])?, parse_idx(fields[1])?, score));
        }
        let dim = header
            .get("dim")
            .ok_or_else(|| Error::Parse {
                line: 1,
                reason: "missing '# dim=' header".into(),
            })?
            .parse::<usize>()
            .map_err(|e| Error::Parse {
                line: 1,
                reason: e.to_string(),
            })?;
        let tau = header
            .get("tau")
            .and_then(|t| t.parse::<f64>().ok())
            .unwrap_or(0.0);
        Ok((Self::from_pairs(dim, tau, pairs)?, header))
    }
}

/// Iterator over the nonzero entries of one matrix row.
pub enum RowIter<'a> {
    Dense { row: &'a [f64], pos: usize },
    Sparse(std::slice::Iter<'a, (usize, f64)>),
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            RowIter::Dense { row, pos } => {
                while *pos < row.len() {
                    let j = *pos;
                    *pos += 1;
                    if row[j] != 0.0 {
                        return Some((j, row[j]));
                    }
                }
                None
            }
            RowIter::Sparse(it) => it.next().copied(),
        }
    }
}

/// Formats `x` with `digits` significant digits in positional notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
