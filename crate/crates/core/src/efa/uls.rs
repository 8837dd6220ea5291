//! Unweighted least squares (minres) extraction by iterated principal axes.
//!
//! Each iteration replaces the diagonal of the correlation matrix with the
//! current communalities, takes the top `k` eigenpairs (negative eigenvalues
//! clipped to zero) and recomputes communalities from the loadings. Fixed
//! points minimize the off-diagonal residual sum of squares.

use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::correlation::CorrelationMatrix;
use super::eigen::symmetric_eigen;
use super::{ExtractionInfo, FactorModel};
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlsOptions {
    /// Stop once the largest communality change falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for UlsOptions {
    fn default() -> Self {
        UlsOptions {
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

/// Starting communalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCommunalities {
    /// `1 - 1 / diag(C⁻¹)`.
    SquaredMultipleCorrelation,
    /// Largest absolute off-diagonal correlation per row; used when C is singular.
    MaxAbsCorrelation,
}

/// Off-diagonal residual sum of squares `Σ_{i≠j} (c_ij - (ΛΛᵀ)_ij)²`.
pub fn uls_objective<T: Scalar>(c: &Array2<T>, loadings: &Array2<T>) -> T {
    let implied = loadings.dot(&loadings.t());
    let p = c.nrows();
    let mut total = T::zero();
    for i in 0..p {
        for j in 0..p {
            if i != j {
                let r = c[[i, j]] - implied[[i, j]];
                total += r * r;
            }
        }
    }
    total
}

fn squared_multiple_correlations<T: Scalar>(c: &Array2<T>) -> Option<Array1<T>> {
    let p = c.nrows();
    let tiny = T::epsilon() * T::of_usize(p.max(1)) * T::of(16.0);
    // Lower Cholesky factor.
    let mut l = Array2::<T>::zeros((p, p));
    for j in 0..p {
        let mut d = c[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d.is_nan() || d <= tiny {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..p {
            let mut v = c[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / d;
        }
    }
    // diag(C⁻¹)_i = Σ_k (L⁻¹)_{k,i}²; solve L x = e_i for each i.
    let mut smc = Array1::zeros(p);
    let mut x = vec![T::zero(); p];
    for i in 0..p {
        x.iter_mut().for_each(|v| *v = T::zero());
        let mut sum = T::zero();
        for r in i..p {
            let mut v = if r == i { T::one() } else { T::zero() };
            for k in i..r {
                v -= l[[r, k]] * x[k];
            }
            x[r] = v / l[[r, r]];
            sum += x[r] * x[r];
        }
        let value = T::one() - T::one() / sum;
        if !value.is_finite() {
            return None;
        }
        smc[i] = value.max(T::zero()).min(T::one());
    }
    Some(smc)
}

fn max_abs_correlation<T: Scalar>(c: &Array2<T>) -> Array1<T> {
    let p = c.nrows();
    (0..p)
        .map(|i| {
            (0..p)
                .filter(|&j| j != i)
                .map(|j| c[[i, j]].abs())
                .fold(T::zero(), T::max)
        })
        .collect()
}

/// Leading `k` eigenpairs of `a`, descending.
fn top_eigenpairs<T: Scalar>(a: &Array2<T>, k: usize) -> Result<(Array1<T>, Array2<T>)> {
    let eig = symmetric_eigen(a)?;
    Ok((
        eig.values.slice(s![..k]).to_owned(),
        eig.vectors.slice(s![.., ..k]).to_owned(),
    ))
}

fn loadings_from<T: Scalar>(values: &Array1<T>, vectors: &Array2<T>) -> Array2<T> {
    let mut l = vectors.clone();
    for (mut col, &v) in l.axis_iter_mut(Axis(1)).zip(values.iter()) {
        let s = v.max(T::zero()).sqrt();
        col.mapv_inplace(|x| x * s);
    }
    l
}

/// Flip each column so its largest-magnitude entry is positive.
pub(crate) fn normalize_signs<T: Scalar>(m: &mut Array2<T>) -> Vec<bool> {
    let mut flipped = Vec::with_capacity(m.ncols());
    for mut col in m.axis_iter_mut(Axis(1)) {
        let mut best = T::zero();
        let mut sign_negative = false;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign_negative = v < T::zero();
            }
        }
        if sign_negative {
            col.mapv_inplace(|x| -x);
        }
        flipped.push(sign_negative);
    }
    flipped
}

/// Extract `k` factors from `c` by unweighted least squares.
pub fn extract_uls<T: Scalar>(
    c: &CorrelationMatrix<T>,
    k: usize,
    opts: &UlsOptions,
) -> Result<FactorModel<T>> {
    let p = c.dim();
    if k == 0 || k >= p {
        return Err(Error::Validation(format!(
            "factor count must satisfy 1 <= k < p, got k = {k}, p = {p}"
        )));
    }
    let cv = c.values();
    let eigenvalues = super::eigen::symmetric_eigenvalues(cv)?;

    let (mut h2, initial) = match squared_multiple_correlations(cv) {
        Some(smc) => (smc, InitialCommunalities::SquaredMultipleCorrelation),
        None => (max_abs_correlation(cv), InitialCommunalities::MaxAbsCorrelation),
    };
    let tol = T::of(opts.tol);
    let mut reduced = cv.clone();
    let mut loadings = Array2::zeros((p, k));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter.max(1) {
        iterations += 1;
        for i in 0..p {
            reduced[[i, i]] = h2[i];
        }
        let (values, vectors) = top_eigenpairs(&reduced, k)?;
        loadings = loadings_from(&values, &vectors);
        let next: Array1<T> = loadings
            .axis_iter(Axis(0))
            .map(|row| row.iter().map(|&x| x * x).sum::<T>().min(T::one()))
            .collect();
        let delta = (&next - &h2)
            .iter()
            .fold(T::zero(), |m, d| m.max(d.abs()));
        h2 = next;
        if delta < tol {
            converged = true;
            break;
        }
    }

    // Heywood rows are scaled back onto the unit sphere.
    let mut heywood = Vec::new();
    for (i, mut row) in loadings.axis_iter_mut(Axis(0)).enumerate() {
        let norm2: T = row.iter().map(|&x| x * x).sum();
        if norm2 > T::one() {
            heywood.push(i);
            let s = norm2.sqrt();
            row.mapv_inplace(|x| x / s);
        }
    }
    normalize_signs(&mut loadings);
    let communalities: Array1<T> = loadings
        .axis_iter(Axis(0))
        .map(|row| row.iter().map(|&x| x * x).sum())
        .collect();
    let uniquenesses = communalities.mapv(|h| T::one() - h);
    let objective = uls_objective(cv, &loadings).to_f64_lossy();
    Ok(FactorModel {
        k,
        rotated: loadings.clone(),
        loadings,
        communalities,
        uniquenesses,
        eigenvalues,
        rotation: Array2::eye(k),
        extraction: ExtractionInfo {
            iterations,
            converged,
            initial,
            heywood,
            objective,
        },
        rotation_info: None,
    })
}
