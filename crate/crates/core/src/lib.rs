//! Classification over sparse autoencoder (SAE) activations.
//!
//! The pipeline starts from a dump of token-level SAE activations (see
//! [`store`]), collapses them into one sequence vector per example
//! ([`pooling`]), optionally restricts the feature space ([`select`]) and
//! trains an L2-regularized multinomial logistic probe ([`classifier`]).
//! [`baselines`] provides TF-IDF and last-token hidden-state features that
//! feed the same probe, and [`harness`] runs the cross-validation, transfer,
//! sampling and overlap experiments on top of all of it.

pub mod baselines;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod harness;
pub mod pooling;
pub mod select;
pub mod store;

pub use error::{Error, Result};

/// Version string recorded in run manifests.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
