//! Word-frequency variation across a document collection, and the latent
//! structure behind it.
//!
//! The pipeline: ingest texts into a sparse word-document count matrix
//! ([`corpus`], [`matrix`]), score each word's across-document frequency
//! variation against the sampling-noise baseline and fit the variance-mean
//! power law ([`varstats`]), then explain the variation with latent factor
//! models: a truncated spectral decomposition ([`lsa`]), a fixed-mixture
//! model fitted by EM ([`plsa`]), and a Dirichlet topic model fitted by
//! variational EM with closed-form moment machinery for the bursty regime
//! ([`lda`]). The [`synth`] module generates corpora with known ground truth
//! and doubles as the oracle for everything else.

pub mod corpus;
pub mod error;
pub mod lda;
pub mod lsa;
pub mod matrix;
pub mod plsa;
pub mod sampling;
mod special;
pub mod synth;
pub mod varstats;

pub use error::{Error, Result};
