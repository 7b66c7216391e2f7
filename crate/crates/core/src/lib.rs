//! Tag and resource similarity over folksonomies.
//!
//! A folksonomy is a set of `(user, resource, tag)` assignments. From it the
//! crate builds the tag-resource count matrix, computes tag-tag and
//! resource-resource similarities by mutual reinforcement (plus cosine,
//! SimRank and LSI baselines), expands tag sets with related tags and ranks
//! resources by TF-IDF.
//!
//! ```
//! use tagsim::corpus::{build_tag_resource_matrix, ingest_assignments};
//! use tagsim::simcore::{compute_similarities, EngineConfig};
//!
//! let data = "u1\tr1\tjava\nu1\tr1\tcode\nu2\tr1\tjava\n";
//! let f = ingest_assignments(data.as_bytes()).unwrap();
//! let tr = build_tag_resource_matrix(&f).unwrap();
//! let out = compute_similarities(&tr, &EngineConfig::default()).unwrap();
//! assert!(out.st.get(0, 1) > 0.9);
//! ```

pub mod baselines;
pub mod corpus;
pub mod error;
pub mod evalharness;
pub mod expand;
mod kernel;
pub mod par;
pub mod search;
pub mod simcore;

pub use error::{Error, Result};
