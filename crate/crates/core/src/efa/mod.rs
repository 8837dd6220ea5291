//! Exploratory factor analysis over a filtered binary document-term matrix.
//!
//! Phi correlations → factor count (Kaiser or fixed) → unweighted least
//! squares extraction → Varimax rotation → loading pruning and factor
//! refinement.

mod correlation;
mod eigen;
mod loadings;
mod uls;
mod varimax;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

pub use correlation::{correlation_matrix, CorrelationMatrix};
pub use eigen::{symmetric_eigen, symmetric_eigenvalues, SymmetricEigen};
pub use loadings::{
    prune_loadings, refine_factors, write_loadings_csv, FactorLoadings, LoadingEntry, LoadingTable,
};
pub use uls::{extract_uls, uls_objective, InitialCommunalities, UlsOptions};
pub use varimax::{varimax_criterion, varimax_rotate, Varimax, VarimaxOptions};

/// How many factors to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    /// Eigenvalues of the correlation matrix greater than 1.
    Kaiser,
    Fixed(usize),
}

impl std::str::FromStr for FactorMethod {
    type Err = Error;

    /// `kaiser` or `fixed:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "kaiser" => Ok(FactorMethod::Kaiser),
            other => other
                .strip_prefix("fixed:")
                .and_then(|k| k.trim().parse().ok())
                .map(FactorMethod::Fixed)
                .ok_or_else(|| {
                    Error::Config(format!("factor method must be `kaiser` or `fixed:<k>`, got `{s}`"))
                }),
        }
    }
}

impl std::fmt::Display for FactorMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FactorMethod::Kaiser => f.write_str("kaiser"),
            FactorMethod::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

/// Factor count for a descending spectrum.
///
/// Kaiser counts eigenvalues above 1 and never returns less than 1; a fixed
/// count is clamped to `[1, p]`.
pub fn select_factor_count<T: Scalar>(eigenvalues: &[T], method: FactorMethod) -> Result<usize> {
    if eigenvalues.is_empty() {
        return Err(Error::Validation("factor count needs a non-empty spectrum".into()));
    }
    Ok(match method {
        FactorMethod::Kaiser => eigenvalues.iter().filter(|&&v| v > T::one()).count().max(1),
        FactorMethod::Fixed(k) => k.clamp(1, eigenvalues.len()),
    })
}

/// Extraction diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionInfo {
    pub iterations: usize,
    pub converged: bool,
    pub initial: InitialCommunalities,
    /// Variables whose communality exceeded 1 and was clamped.
    pub heywood: Vec<usize>,
    /// Off-diagonal residual sum of squares at the solution.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationInfo {
    pub kaiser_normalize: bool,
    pub sweeps: usize,
    pub converged: bool,
    pub criterion: f64,
}

/// An extracted (and possibly rotated) factor solution for `p` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel<T> {
    pub k: usize,
    /// Unrotated loadings, `p × k`.
    pub loadings: Array2<T>,
    pub communalities: Array1<T>,
    pub uniquenesses: Array1<T>,
    /// Spectrum of the correlation matrix, descending.
    pub eigenvalues: Array1<T>,
    /// Orthogonal `k × k` rotation; identity until rotated.
    pub rotation: Array2<T>,
    /// `loadings · rotation`.
    pub rotated: Array2<T>,
    pub extraction: ExtractionInfo,
    pub rotation_info: Option<RotationInfo>,
}

impl<T: Scalar> FactorModel<T> {
    pub fn p(&self) -> usize {
        self.loadings.nrows()
    }

    /// Apply Varimax to the unrotated loadings.
    pub fn rotate_varimax(mut self, opts: &VarimaxOptions) -> Self {
        let v = varimax_rotate(&self.loadings, opts);
        self.rotation_info = Some(RotationInfo {
            kaiser_normalize: opts.kaiser_normalize,
            sweeps: v.sweeps,
            converged: v.converged,
            criterion: v.criterion_trace.last().map_or(0.0, |c| c.to_f64_lossy()),
        });
        self.rotated = v.rotated;
        self.rotation = v.rotation;
        self
    }
}
