//! Lexical factor analysis of review corpora.
//!
//! The pipeline runs: reviews ([`ingest`]) → noun/adjective term dictionary
//! ([`lexicon`]) → binary document-term matrix and variance filter
//! ([`matrix`]) → exploratory factor analysis with unweighted least squares
//! extraction and Varimax rotation ([`efa`]) → per-factor reports
//! ([`report`]). [`pipeline`] wires the stages to files on disk.
//!
//! The numerical kernels are generic over [`Scalar`] (`f32`, `f64`); the
//! aliases below fix the element type to `f64`, which is what the pipeline
//! uses.

pub mod error;
pub mod ingest;
pub mod lexicon;
pub mod efa;
pub mod matrix;
pub mod pipeline;
pub mod report;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations of the generic types.
pub type CorrelationMatrixF64 = efa::CorrelationMatrix<f64>;
pub type FactorModelF64 = efa::FactorModel<f64>;
pub type SymmetricEigenF64 = efa::SymmetricEigen<f64>;
pub type VarimaxF64 = efa::Varimax<f64>;
pub type ColumnStatsF64 = matrix::ColumnStats<f64>;
