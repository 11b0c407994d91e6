//! Latent space models for binary multidimensional (multiplex) networks.
//!
//! A multiplex is a collection of `K` networks (views) observed on a shared
//! set of `n` nodes. Edge probabilities follow a logistic model driven by a
//! single latent space common to all views, view-specific intercept and
//! distance-decay parameters, and optional node-specific sender/receiver
//! effects that capture degree heterogeneity within and between views:
//!
//! ```text
//! P(y_ij^(k) = 1) = logistic( α^(k) φ_ij^(k) − β^(k) d_ij − Σ_f λ_f x_ijf )
//! ```
//!
//! with `d_ij` the squared Euclidean distance between latent positions and
//! `φ_ij^(k)` the combined sender/receiver effect. Each of the two effects is
//! Null, Constant across views, or Variable per view, giving a 3×3 family of
//! models (NN … VV) for directed data and a N/C/V family for undirected data.
//!
//! The crate provides:
//!
//! - [`multiplex`]: the data model, CSV ingestion, degree and association
//!   statistics;
//! - [`model`]: model specifications, parameter state, likelihood and
//!   log-posterior evaluation;
//! - [`init`]: identifiability pins and the initialization pipeline
//!   (geodesic averages, classical MDS, logistic-regression starts);
//! - [`sampler`]: the Metropolis–Hastings-within-Gibbs estimation engine;
//! - [`simulate`]: synthetic multiplex generation;
//! - [`select`]: heuristic model selection from degree-correlation summary
//!   statistics via an LDA classifier trained on simulated multiplexes;
//! - [`metrics`]: distance correlation, Spearman and Procrustes correlation,
//!   posterior summaries and recovery reports.

pub mod error;
pub mod init;
pub mod io;
pub mod metrics;
pub mod model;
pub mod multiplex;
pub mod procrustes;
pub mod sampler;
pub mod select;
pub mod simulate;
pub mod stats;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
