//! Per-factor reports: loaded words, exemplar reviews, coverage and analyst
//! theme labels, emitted as a markdown table, JSON and CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::efa::{FactorLoadings, LoadingEntry, LoadingTable};
use crate::error::{Error, Result};
use crate::matrix::DocTermMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub factor: usize,
    pub theme_label: Option<String>,
    pub top_words: Vec<LoadingEntry>,
    pub exemplar_review_ids: Vec<String>,
    /// Fraction of documents containing at least one factor word.
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
    Csv,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Markdown, ReportFormat::Json, ReportFormat::Csv];

    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "report.md",
            ReportFormat::Json => "report.json",
            ReportFormat::Csv => "report.csv",
        }
    }
}

fn factor_columns(factor: &FactorLoadings, m: &DocTermMatrix) -> Result<Vec<u32>> {
    let mut cols = factor
        .entries
        .iter()
        .map(|e| {
            m.term_position(&e.term).map(|c| c as u32).ok_or_else(|| {
                Error::Validation(format!("factor {} term `{}` is not a matrix column", factor.factor, e.term))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    cols.sort_unstable();
    cols.dedup();
    Ok(cols)
}

/// Number of `cols` (sorted) present in a sorted row.
fn hits(row: &[u32], cols: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < row.len() && j < cols.len() {
        match row[i].cmp(&cols[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Reviews containing factor words, by distinct factor words present
/// (descending) then review id, at most `limit`.
pub fn exemplar_reviews(factor: &FactorLoadings, m: &DocTermMatrix, limit: usize) -> Result<Vec<String>> {
    let cols = factor_columns(factor, m)?;
    let mut ranked: Vec<(usize, &str)> = m
        .rows()
        .iter()
        .zip(m.doc_ids())
        .filter_map(|(row, id)| match hits(row, &cols) {
            0 => None,
            n => Some((n, id.as_str())),
        })
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(ranked.into_iter().take(limit).map(|(_, id)| id.to_string()).collect())
}

fn coverage(factor: &FactorLoadings, m: &DocTermMatrix) -> Result<f64> {
    if m.n_docs() == 0 {
        return Ok(0.0);
    }
    let cols = factor_columns(factor, m)?;
    let covered = m.rows().iter().filter(|row| hits(row, &cols) > 0).count();
    Ok(covered as f64 / m.n_docs() as f64)
}

/// One unlabeled report per factor of `table`.
pub fn build_reports(table: &LoadingTable, m: &DocTermMatrix, limit: usize) -> Result<Vec<FactorReport>> {
    table
        .factors
        .iter()
        .map(|f| {
            Ok(FactorReport {
                factor: f.factor,
                theme_label: None,
                top_words: f.entries.clone(),
                exemplar_review_ids: exemplar_reviews(f, m, limit)?,
                coverage: coverage(f, m)?,
            })
        })
        .collect()
}

/// Parse a label file: a JSON object mapping factor numbers to labels.
pub fn read_labels(path: &Path) -> Result<BTreeMap<usize, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text)
}

pub fn parse_labels(text: &str) -> Result<BTreeMap<usize, String>> {
    let raw: BTreeMap<String, String> = serde_json::from_str(text)
        .map_err(|e| Error::Validation(format!("label file is not a JSON object of strings: {e}")))?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<usize>()
                .map(|id| (id, v))
                .map_err(|_| Error::Validation(format!("label key `{k}` is not a factor number")))
        })
        .collect()
}

/// Attach labels; every labeled id must name one of the reports.
pub fn attach_labels(mut reports: Vec<FactorReport>, labels: &BTreeMap<usize, String>) -> Result<Vec<FactorReport>> {
    for (&id, label) in labels {
        let report = reports.iter_mut().find(|r| r.factor == id).ok_or_else(|| {
            Error::Validation(format!("label for factor {id}, which is not among the reported factors"))
        })?;
        report.theme_label = Some(label.clone());
    }
    Ok(reports)
}

/// `suite (0.65), ticket (0.41)`; `{:.2}` rounds exact ties to even.
pub fn format_loaded_words(words: &[LoadingEntry]) -> String {
    let mut out = String::new();
    for (i, e) in words.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} ({:.2})", e.term, e.loading);
    }
    out
}

fn md_cell(s: &str) -> String {
    s.replace('\\', "\\\\").replace('|', "\\|").replace(['\n', '\r'], " ")
}

pub fn render_markdown(reports: &[FactorReport]) -> String {
    let mut out = String::from("| Factor # | Loaded words | Theme label |\n|---|---|---|\n");
    for r in reports {
        let _ = writeln!(
            out,
            "| {} | {} | {} |",
            r.factor,
            md_cell(&format_loaded_words(&r.top_words)),
            md_cell(r.theme_label.as_deref().unwrap_or(""))
        );
    }
    out
}

pub fn render_json(reports: &[FactorReport]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Validation(format!("report serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render_csv(reports: &[FactorReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Validation(format!("report serialization: {e}"));
    w.write_record(["factor", "theme_label", "loaded_words", "exemplar_review_ids", "coverage"])
        .map_err(err)?;
    for r in reports {
        w.write_record([
            r.factor.to_string(),
            r.theme_label.clone().unwrap_or_default(),
            format_loaded_words(&r.top_words),
            r.exemplar_review_ids.join(";"),
            r.coverage.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output of utf-8 fields"))
}

pub fn render(reports: &[FactorReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Markdown => Ok(render_markdown(reports)),
        ReportFormat::Json => render_json(reports),
        ReportFormat::Csv => render_csv(reports),
    }
}

/// Write `reports` in `format` to `dir/<format file name>`, returning the path.
pub fn emit_report(reports: &[FactorReport], format: ReportFormat, dir: &Path) -> Result<std::path::PathBuf> {
    let path = dir.join(format.file_name());
    std::fs::write(&path, render(reports, format)?).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
