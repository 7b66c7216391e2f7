use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Method, RatioOutcome, SplitSpec};
use crate::error::Result;
use crate::simcore::format_sig;

/// Averaged retrieved ratio of one `(method, q, enriched)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub q: usize,
    pub enriched: bool,
    pub mean_ratio: f64,
    pub per_repeat: Vec<f64>,
    /// Test bookmarks skipped per repeat for lack of known tags.
    pub skipped: Vec<usize>,
}

impl ReportRow {
    pub(super) fn from_outcomes(
        method: Method,
        q: usize,
        enriched: bool,
        outcomes: &[RatioOutcome],
    ) -> Self {
        let per_repeat: Vec<f64> = outcomes.iter().map(RatioOutcome::ratio).collect();
        let mean_ratio = per_repeat.iter().sum::<f64>() / per_repeat.len() as f64;
        Self {
            method,
            q,
            enriched,
            mean_ratio,
            per_repeat,
            skipped: outcomes.iter().map(|o| o.skipped).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_bookmarks: usize,
    pub split: SplitSpec,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, method: Method, q: usize, enriched: bool) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.q == q && r.enriched == enriched)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per row: `method<TAB>q<TAB>enriched<TAB>mean_ratio` followed
    /// by the per-repeat ratios.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method\tq\tenriched\tmean_ratio\tper_repeat")?;
        for r in &self.rows {
            let reps: Vec<String> = r.per_repeat.iter().map(|x| format_sig(*x, 6)).collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.method,
                r.q,
                r.enriched,
                format_sig(r.mean_ratio, 6),
                reps.join(",")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_round_trip() {
        let outcomes = [
            RatioOutcome {
                hits: 1,
                evaluated: 4,
                skipped: 0,
            },
            RatioOutcome {
                hits: 3,
                evaluated: 4,
                skipped: 2,
            },
        ];
        let row = ReportRow::from_outcomes(Method::Mrs, 10, true, &outcomes);
        assert_eq!(row.per_repeat, vec![0.25, 0.75]);
        assert_eq!(row.mean_ratio, 0.5);
        let report = EvalReport {
            n_bookmarks: 8,
            split: SplitSpec::default(),
            rows: vec![row],
        };
        let json = report.to_json().unwrap();
        assert!(json.contains("\"method\": \"mrs\""));
        assert_eq!(EvalReport::from_json(&json).unwrap(), report);
        let mut tsv = Vec::new();
        report.write_tsv(&mut tsv).unwrap();
        assert!(String::from_utf8(tsv)
            .unwrap()
            .contains("mrs\t10\ttrue\t0.500000\t0.250000,0.750000"));
    }
}
