//! Mutual-reinforcement tag and resource similarity.
//!
//! Starting from the identity (every item similar only to itself), each
//! step recomputes
//!
//! ```text
//! ST = TR  (Psi_r o sr) TR^T        st = ST o DT,  DT_ab = 1 / (sqrt(ST_aa) sqrt(ST_bb))
//! SR = TR^T (Psi_t o st) TR         sr = SR o DR,  DR_ab = 1 / (sqrt(SR_aa) sqrt(SR_bb))
//! ```
//!
//! where `Psi` is 1 on the diagonal and `psi` elsewhere, and `o` is the
//! entrywise product. Both halves of a step read the previous pair
//! (Jacobi-style). Iteration stops once the relative entrywise change of
//! both matrices drops below `epsilon`.

mod matrix;
pub mod oracle;
mod trace;

pub use matrix::{format_sig, RowIter, SimilarityMatrix};
pub use oracle::{pairwise_step_oracle, Side};
pub use trace::{convergence_delta, ConvergenceTrace, MatrixNorm, TraceStep};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::corpus::TagResourceMatrix;
use crate::error::{invalid, Error, Result};
use crate::kernel::{normalize_gram as normalize, sandwich, Csr};

/// Parameters of the iterative similarity computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Mutual reinforcement factor in `[0, 1]`.
    pub psi: f64,
    /// Stop once both relative deltas fall below this.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Off-diagonal scores below this are dropped from the final matrices.
    pub tau: f64,
    /// Largest `max(n_tags, n_resources)` allowed for dense iteration.
    pub size_limit: usize,
    pub norm: MatrixNorm,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            psi: 0.5,
            epsilon: 0.1,
            max_iters: 30,
            tau: 1e-4,
            size_limit: 5_000,
            norm: MatrixNorm::Entrywise,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        check_psi(self.psi)?;
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid(
                "epsilon",
                format!("must be > 0, got {}", self.epsilon),
            ));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(invalid(
                "tau",
                format!("must lie in [0,1), got {}", self.tau),
            ));
        }
        if self.size_limit == 0 {
            return Err(invalid("size_limit", "must be at least 1"));
        }
        Ok(())
    }
}

fn check_psi(psi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&psi) {
        return Err(invalid("psi", format!("must lie in [0,1], got {psi}")));
    }
    Ok(())
}

/// The base case: identity similarity of dimension `n`.
pub fn init_similarity(n: usize) -> Result<SimilarityMatrix> {
    SimilarityMatrix::identity(n)
}

/// Output of one reinforcement step.
#[derive(Debug, Clone)]
pub struct MrsStep {
    pub st: SimilarityMatrix,
    pub sr: SimilarityMatrix,
    /// Tags with an all-zero row; they keep identity similarities.
    pub zero_tags: Vec<usize>,
    /// Resources with an all-zero column; they keep identity similarities.
    pub zero_resources: Vec<usize>,
}

/// Un-normalized `ST = TR (Psi_r o sr_prev) TR^T`, dense row-major.
pub fn tag_numerators(
    tr: &TagResourceMatrix,
    sr_prev: &SimilarityMatrix,
    psi: f64,
) -> Result<Vec<f64>> {
    check_psi(psi)?;
    check_dim(tr.n_resources(), sr_prev)?;
    Ok(sandwich(&Csr::tag_rows(tr), &reinforce(sr_prev, psi)))
}

/// Un-normalized `SR = TR^T (Psi_t o st_prev) TR`, dense row-major.
pub fn resource_numerators(
    tr: &TagResourceMatrix,
    st_prev: &SimilarityMatrix,
    psi: f64,
) -> Result<Vec<f64>> {
    check_psi(psi)?;
    check_dim(tr.n_tags(), st_prev)?;
    Ok(sandwich(&Csr::resource_rows(tr), &reinforce(st_prev, psi)))
}

/// One Jacobi step from `(st_prev, sr_prev)`.
pub fn mrs_step(
    tr: &TagResourceMatrix,
    st_prev: &SimilarityMatrix,
    sr_prev: &SimilarityMatrix,
    psi: f64,
) -> Result<MrsStep> {
    let tags = Csr::tag_rows(tr);
    let resources = Csr::resource_rows(tr);
    check_psi(psi)?;
    check_dim(tr.n_tags(), st_prev)?;
    check_dim(tr.n_resources(), sr_prev)?;
    let (st, zero_tags) = normalize(sandwich(&tags, &reinforce(sr_prev, psi)), tr.n_tags());
    let (sr, zero_resources) = normalize(
        sandwich(&resources, &reinforce(st_prev, psi)),
        tr.n_resources(),
    );
    Ok(MrsStep {
        st: SimilarityMatrix::from_dense(tr.n_tags(), st)?,
        sr: SimilarityMatrix::from_dense(tr.n_resources(), sr)?,
        zero_tags,
        zero_resources,
    })
}

fn check_dim(expected: usize, m: &SimilarityMatrix) -> Result<()> {
    if m.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: m.dim(),
        });
    }
    Ok(())
}

/// `Psi o s`: off-diagonal entries scaled by `psi`, diagonal untouched.
fn reinforce(s: &SimilarityMatrix, psi: f64) -> Vec<f64> {
    let n = s.dim();
    let mut d = s.to_dense();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i * n + j] *= psi;
            }
        }
    }
    d
}

/// Final matrices of a run plus its convergence history.
#[derive(Debug, Clone)]
pub struct SimilarityOutcome {
    pub st: SimilarityMatrix,
    pub sr: SimilarityMatrix,
    pub trace: ConvergenceTrace,
    pub zero_tags: Vec<usize>,
    pub zero_resources: Vec<usize>,
}

/// Iterates [`mrs_step`] from the identity until both deltas drop below
/// `cfg.epsilon` or `cfg.max_iters` steps ran. The returned matrices are
/// sparsified by `cfg.tau`.
pub fn compute_similarities(
    tr: &TagResourceMatrix,
    cfg: &EngineConfig,
) -> Result<SimilarityOutcome> {
    cfg.validate()?;
    let size = tr.n_tags().max(tr.n_resources());
    if size > cfg.size_limit {
        return Err(Error::SizeLimitExceeded {
            size,
            limit: cfg.size_limit,
        });
    }
    let (nt, nr) = (tr.n_tags(), tr.n_resources());
    let mut st = init_similarity(nt)?;
    let mut sr = init_similarity(nr)?;
    let mut st_prev = st.to_dense();
    let mut sr_prev = sr.to_dense();
    let mut trace = ConvergenceTrace::default();
    let mut zero_tags = Vec::new();
    let mut zero_resources = Vec::new();

    for k in 1..=cfg.max_iters {
        let step = mrs_step(tr, &st, &sr, cfg.psi)?;
        let st_now = step.st.to_dense();
        let sr_now = step.sr.to_dense();
        let delta_t = trace::relative_delta(&st_now, &st_prev, nt, cfg.norm);
        let delta_r = trace::relative_delta(&sr_now, &sr_prev, nr, cfg.norm);
        debug!("iteration {k}: delta_t={delta_t:.6} delta_r={delta_r:.6}");
        trace.steps.push(TraceStep {
            k,
            delta_t,
            delta_r,
        });
        trace.iterations_run = k;
        zero_tags = step.zero_tags;
        zero_resources = step.zero_resources;
        st = step.st;
        sr = step.sr;
        st_prev = st_now;
        sr_prev = sr_now;
        if delta_t < cfg.epsilon && delta_r < cfg.epsilon {
            trace.converged = true;
            break;
        }
    }
    if !zero_tags.is_empty() || !zero_resources.is_empty() {
        warn!(
            "{} tags and {} resources have no assignments; kept at identity",
            zero_tags.len(),
            zero_resources.len()
        );
    }
    if !trace.converged {
        warn!(
            "no convergence below epsilon={} after {} iterations",
            cfg.epsilon, cfg.max_iters
        );
    }
    Ok(SimilarityOutcome {
        st: st.sparsify(cfg.tau),
        sr: sr.sparsify(cfg.tau),
        trace,
        zero_tags,
        zero_resources,
    })
}
