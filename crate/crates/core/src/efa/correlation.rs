use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DocTermMatrix;
use crate::Scalar;

/// Symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    values: Array2<T>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    /// Wrap a dense matrix after checking symmetry (1e-12), unit diagonal and range.
    pub fn from_array(values: Array2<T>) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m {
            return Err(Error::Validation(format!("correlation matrix is {n}x{m}")));
        }
        let tol = T::of(1e-12);
        for i in 0..n {
            if values[[i, i]] != T::one() {
                return Err(Error::Validation(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let (a, b) = (values[[i, j]], values[[j, i]]);
                if !a.is_finite() || (a - b).abs() > tol {
                    return Err(Error::Validation(format!("entries ({i},{j}) are not symmetric")));
                }
                if a.abs() > T::one() {
                    return Err(Error::Validation(format!("entry ({i},{j}) outside [-1, 1]")));
                }
            }
        }
        Ok(CorrelationMatrix { values })
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn into_inner(self) -> Array2<T> {
        self.values
    }
}

/// Phi coefficients between all pairs of binary columns.
///
/// With `n` documents, document frequencies `a`, `b` and co-occurrence
/// count `c`, `r = (n c - a b) / sqrt(a (n - a) b (n - b))`. Counts are
/// integers, so the result does not depend on thread count.
pub fn correlation_matrix<T: Scalar>(m: &DocTermMatrix) -> Result<CorrelationMatrix<T>> {
    let n = m.n_docs();
    let p = m.n_terms();
    let df = m.doc_freq();
    if let Some(col) = (0..p).find(|&c| df[c] == 0 || df[c] == n) {
        return Err(Error::DegenerateColumn {
            column: col,
            term: m.terms()[col].clone(),
        });
    }
    let postings = m.postings();
    let rows = m.rows();

    // Upper-triangular co-occurrence counts, one output row per column.
    let counts: Vec<Vec<u32>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u32; p - i];
            for &d in &postings[i] {
                let r = &rows[d as usize];
                let start = r.partition_point(|&c| (c as usize) < i);
                for &j in &r[start..] {
                    row[j as usize - i] += 1;
                }
            }
            row
        })
        .collect();

    let nn = n as i128;
    let spread: Vec<T> = df
        .iter()
        .map(|&a| T::of_usize(a) * T::of_usize(n - a))
        .collect();
    let mut values = Array2::<T>::zeros((p, p));
    for i in 0..p {
        values[[i, i]] = T::one();
        for j in i + 1..p {
            let c = counts[i][j - i] as i128;
            let num = nn * c - df[i] as i128 * df[j] as i128;
            let r = T::from_i128(num).unwrap_or_else(T::nan) / (spread[i] * spread[j]).sqrt();
            let r = r.max(-T::one()).min(T::one());
            values[[i, j]] = r;
            values[[j, i]] = r;
        }
    }
    Ok(CorrelationMatrix { values })
}
