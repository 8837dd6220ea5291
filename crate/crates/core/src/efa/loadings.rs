//! Pruned per-factor loading tables and factor refinement.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FactorModel;
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingEntry {
    pub term: String,
    pub loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorLoadings {
    /// 1-based factor number in the rotated solution.
    pub factor: usize,
    /// Terms with |loading| ≥ threshold, by |loading| descending then term.
    pub entries: Vec<LoadingEntry>,
}

impl FactorLoadings {
    pub fn top_abs(&self) -> f64 {
        self.entries.first().map_or(0.0, |e| e.loading.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingTable {
    pub threshold: f64,
    pub factors: Vec<FactorLoadings>,
}

/// Keep, per factor, the terms whose absolute rotated loading is at least `threshold`.
pub fn prune_loadings<T: Scalar>(
    model: &FactorModel<T>,
    terms: &[String],
    threshold: f64,
) -> Result<LoadingTable> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::Validation(format!("loading threshold must be >= 0, got {threshold}")));
    }
    if terms.len() != model.rotated.nrows() {
        return Err(Error::Validation(format!(
            "{} terms for a model over {} variables",
            terms.len(),
            model.rotated.nrows()
        )));
    }
    let factors = model
        .rotated
        .columns()
        .into_iter()
        .enumerate()
        .map(|(f, col)| {
            let mut entries: Vec<LoadingEntry> = col
                .iter()
                .zip(terms)
                .map(|(&l, t)| LoadingEntry {
                    term: t.clone(),
                    loading: l.to_f64_lossy(),
                })
                .filter(|e| e.loading.abs() >= threshold)
                .collect();
            entries.sort_by(|a, b| {
                b.loading
                    .abs()
                    .total_cmp(&a.loading.abs())
                    .then_with(|| a.term.cmp(&b.term))
            });
            FactorLoadings {
                factor: f + 1,
                entries,
            }
        })
        .collect();
    Ok(LoadingTable { threshold, factors })
}

/// Keep the `retain` factors with the largest top absolute loading.
///
/// Ties go to the lower factor number; output stays in factor order.
pub fn refine_factors(table: &LoadingTable, retain: usize) -> Result<LoadingTable> {
    if retain == 0 {
        return Err(Error::Validation("retain must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..table.factors.len()).collect();
    order.sort_by(|&a, &b| {
        table.factors[b]
            .top_abs()
            .total_cmp(&table.factors[a].top_abs())
            .then(table.factors[a].factor.cmp(&table.factors[b].factor))
    });
    order.truncate(retain);
    order.sort_by_key(|&i| table.factors[i].factor);
    Ok(LoadingTable {
        threshold: table.threshold,
        factors: order.into_iter().map(|i| table.factors[i].clone()).collect(),
    })
}

/// Every rotated loading as CSV: `factor,term,loading,retained`.
pub fn write_loadings_csv<T: Scalar, W: Write>(
    model: &FactorModel<T>,
    terms: &[String],
    table: &LoadingTable,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("loadings.csv", e.into());
    w.write_record(["factor", "term", "loading", "retained"]).map_err(io)?;
    for (f, col) in model.rotated.columns().into_iter().enumerate() {
        let kept = table.factors.iter().find(|fl| fl.factor == f + 1);
        for (term, &l) in terms.iter().zip(col.iter()) {
            let retained = kept.is_some_and(|fl| fl.entries.iter().any(|e| &e.term == term));
            w.write_record([
                (f + 1).to_string(),
                term.clone(),
                l.to_f64_lossy().to_string(),
                retained.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io("loadings.csv", e))
}
