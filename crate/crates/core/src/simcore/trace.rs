use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::matrix::{format_sig, SimilarityMatrix};
use crate::error::{Error, Result};

/// Matrix norm used by the relative convergence delta.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixNorm {
    /// Sum of absolute values of all entries.
    #[default]
    Entrywise,
    /// Induced 1-norm: the largest absolute column sum.
    Induced,
}

impl std::fmt::Display for MatrixNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Entrywise => "entrywise",
            Self::Induced => "induced",
        })
    }
}

impl std::str::FromStr for MatrixNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entrywise" => Ok(Self::Entrywise),
            "induced" => Ok(Self::Induced),
            other => Err(crate::error::invalid(
                "norm",
                format!("expected 'entrywise' or 'induced', got {other:?}"),
            )),
        }
    }
}

/// One iteration's relative change for tags and resources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub k: usize,
    pub delta_t: f64,
    pub delta_r: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
    pub iterations_run: usize,
}

impl ConvergenceTrace {
    /// Writes `k<TAB>delta_t<TAB>delta_r` rows under a column header.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# converged={}", self.converged)?;
        writeln!(out, "# iterations_run={}", self.iterations_run)?;
        writeln!(out, "k\tdelta_t\tdelta_r")?;
        for s in &self.steps {
            writeln!(
                out,
                "{}\t{}\t{}",
                s.k,
                format_sig(s.delta_t, 9),
                format_sig(s.delta_r, 9)
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut trace = ConvergenceTrace::default();
        let mut saw_iterations = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if let Some(rest) = line.strip_prefix('#') {
                match rest.trim().split_once('=') {
                    Some(("converged", v)) => trace.converged = v.trim() == "true",
                    Some(("iterations_run", v)) => {
                        trace.iterations_run = v.trim().parse().map_err(|_| Error::Parse {
                            line: lineno,
                            reason: "bad iterations_run".into(),
                        })?;
                        saw_iterations = true;
                    }
                    _ => {}
                }
                continue;
            }
            if line.starts_with("k\t") || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = |reason: &str| Error::Parse {
                line: lineno,
                reason: reason.into(),
            };
            if f.len() < 3 {
                return Err(bad("expected k<TAB>delta_t<TAB>delta_r"));
            }
            trace.steps.push(TraceStep {
                k: f[0].parse().map_err(|_| bad("bad k"))?,
                delta_t: f[1].parse().map_err(|_| bad("bad delta_t"))?,
                delta_r: f[2].parse().map_err(|_| bad("bad delta_r"))?,
            });
        }
        if !saw_iterations {
            trace.iterations_run = trace.steps.len();
        }
        Ok(trace)
    }
}

/// `||curr - prev|| / ||curr||` under the chosen norm.
pub fn convergence_delta(
    curr: &SimilarityMatrix,
    prev: &SimilarityMatrix,
    norm: MatrixNorm,
) -> Result<f64> {
    if curr.dim() != prev.dim() {
        return Err(Error::DimensionMismatch {
            expected: curr.dim(),
            found: prev.dim(),
        });
    }
    Ok(relative_delta(
        &curr.to_dense(),
        &prev.to_dense(),
        curr.dim(),
        norm,
    ))
}

pub(crate) fn relative_delta(curr: &[f64], prev: &[f64], n: usize, norm: MatrixNorm) -> f64 {
    let (num, den) = match norm {
        MatrixNorm::Entrywise => {
            let num: f64 = curr.iter().zip(prev).map(|(c, p)| (c - p).abs()).sum();
            let den: f64 = curr.iter().map(|c| c.abs()).sum();
            (num, den)
        }
        MatrixNorm::Induced => {
            let mut diff_cols = vec![0.0; n];
            let mut curr_cols = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    let c = curr[i * n + j];
                    diff_cols[j] += (c - prev[i * n + j]).abs();
                    curr_cols[j] += c.abs();
                }
            }
            let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
            (max(diff_cols), max(curr_cols))
        }
    };
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
