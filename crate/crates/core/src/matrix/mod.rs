//! Sparse binary document-term matrix, column statistics and the
//! low-variance column filter.

mod market;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{tokenize, Review};
use crate::lexicon::{Lexicon, StopWords, TermDictionary};
use crate::Scalar;

pub use market::{
    load_matrix, read_array, read_pattern, save_matrix, write_array_symmetric, write_pattern,
    MatrixFiles,
};

/// Documents × terms presence matrix stored as one sorted column set per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    doc_ids: Vec<String>,
    terms: Vec<String>,
    rows: Vec<Vec<u32>>,
}

impl DocTermMatrix {
    pub fn new(doc_ids: Vec<String>, terms: Vec<String>, rows: Vec<Vec<u32>>) -> Result<Self> {
        if doc_ids.len() != rows.len() {
            return Err(Error::Validation(format!(
                "{} document ids for {} rows",
                doc_ids.len(),
                rows.len()
            )));
        }
        if terms.len() > u32::MAX as usize {
            return Err(Error::Validation("too many terms".into()));
        }
        let n_terms = terms.len() as u32;
        for (d, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!("row {d} is not strictly increasing")));
            }
            if row.last().is_some_and(|&c| c >= n_terms) {
                return Err(Error::Validation(format!("row {d} has a column out of range")));
            }
        }
        Ok(DocTermMatrix {
            doc_ids,
            terms,
            rows,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn row(&self, doc: usize) -> &[u32] {
        &self.rows[doc]
    }

    pub fn get(&self, doc: usize, term: usize) -> bool {
        self.rows[doc].binary_search(&(term as u32)).is_ok()
    }

    pub fn term_position(&self, term: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == term)
    }

    /// Per-column document frequency.
    pub fn doc_freq(&self) -> Vec<usize> {
        let n_terms = self.n_terms();
        self.rows
            .par_chunks(4096)
            .map(|chunk| {
                let mut counts = vec![0usize; n_terms];
                for row in chunk {
                    for &c in row {
                        counts[c as usize] += 1;
                    }
                }
                counts
            })
            .reduce(
                || vec![0usize; n_terms],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }

    /// Column-major view: for each term, the sorted documents containing it.
    pub fn postings(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_terms()];
        for (d, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c as usize].push(d as u32);
            }
        }
        cols
    }

    /// Keep the listed columns, in the given order (must be increasing).
    pub fn select_columns(&self, keep: &[usize]) -> Result<Self> {
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.last().is_some_and(|&c| c >= self.n_terms()) {
            return Err(Error::Validation("column selection must be increasing and in range".into()));
        }
        let mut remap = vec![u32::MAX; self.n_terms()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new as u32;
        }
        let rows = self
            .rows
            .par_iter()
            .map(|row| {
                row.iter()
                    .map(|&c| remap[c as usize])
                    .filter(|&c| c != u32::MAX)
                    .collect()
            })
            .collect();
        Ok(DocTermMatrix {
            doc_ids: self.doc_ids.clone(),
            terms: keep.iter().map(|&c| self.terms[c].clone()).collect(),
            rows,
        })
    }
}

/// Build the binary presence matrix: rows follow corpus order, columns the dictionary.
///
/// A cell is 1 when any non-stopword token of the review lemmatizes (noun
/// first, then adjective) to the column's term.
pub fn build_matrix(
    corpus: &[Review],
    dict: &TermDictionary,
    lex: &Lexicon,
    stopwords: &StopWords,
) -> Result<DocTermMatrix> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let rows = corpus
        .par_iter()
        .map(|review| {
            let mut row: Vec<u32> = tokenize(&review.text)
                .iter()
                .filter(|t| !stopwords.contains(t.as_str()))
                .filter_map(|t| lex.lemmatize_token(t.as_str()))
                .filter_map(|(lemma, _)| dict.position(lemma))
                .map(|c| c as u32)
                .collect();
            row.sort_unstable();
            row.dedup();
            row
        })
        .collect();
    Ok(DocTermMatrix {
        doc_ids: corpus.iter().map(|r| r.id.clone()).collect(),
        terms: dict.lemmas().map(str::to_owned).collect(),
        rows,
    })
}

/// Document frequency, presence rate `p = df / n` and Bernoulli variance `p (1 - p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats<T> {
    pub doc_freq: usize,
    pub presence: T,
    pub variance: T,
}

pub fn column_stats<T: Scalar>(m: &DocTermMatrix) -> Result<Vec<ColumnStats<T>>> {
    if m.n_docs() == 0 {
        return Err(Error::Validation("column statistics need at least one document".into()));
    }
    let n = T::of_usize(m.n_docs());
    Ok(m.doc_freq()
        .into_iter()
        .map(|df| {
            let p = T::of_usize(df) / n;
            ColumnStats {
                doc_freq: df,
                presence: p,
                variance: p * (T::one() - p),
            }
        })
        .collect())
}

/// How columns survive the variance filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceFilter {
    /// Keep columns with variance ≥ the threshold.
    MinVariance(f64),
    /// Keep the `K` highest-variance columns (ties by column order).
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub term: String,
    pub column: usize,
    pub doc_freq: usize,
    pub variance: f64,
    pub retained: bool,
}

/// Every input column with its variance and whether it survived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub columns: Vec<ColumnSummary>,
}

impl FilterReport {
    pub fn retained(&self) -> impl Iterator<Item = &ColumnSummary> {
        self.columns.iter().filter(|c| c.retained)
    }

    pub fn dropped(&self) -> impl Iterator<Item = &ColumnSummary> {
        self.columns.iter().filter(|c| !c.retained)
    }

    pub fn write_tsv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "column\tterm\tdoc_freq\tvariance\tretained")?;
        for c in &self.columns {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                c.column, c.term, c.doc_freq, c.variance, c.retained
            )?;
        }
        Ok(())
    }
}

/// Drop low-variance columns, preserving the relative order of the survivors.
///
/// In top-K mode zero-variance columns are never retained, since they cannot
/// enter a correlation matrix.
pub fn filter_low_variance(
    m: &DocTermMatrix,
    filter: VarianceFilter,
) -> Result<(DocTermMatrix, FilterReport)> {
    let stats = column_stats::<f64>(m)?;
    let keep: Vec<usize> = match filter {
        VarianceFilter::MinVariance(min) => {
            if !(0.0..0.25).contains(&min) {
                return Err(Error::Validation(format!(
                    "min_variance must lie in [0, 0.25), got {min}"
                )));
            }
            (0..stats.len()).filter(|&c| stats[c].variance >= min).collect()
        }
        VarianceFilter::TopK(k) => {
            if k == 0 {
                return Err(Error::Validation("top_k_variance must be at least 1".into()));
            }
            let mut order: Vec<usize> = (0..stats.len()).filter(|&c| stats[c].variance > 0.0).collect();
            order.sort_by(|&a, &b| stats[b].variance.total_cmp(&stats[a].variance).then(a.cmp(&b)));
            order.truncate(k);
            order.sort_unstable();
            order
        }
    };
    if keep.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut kept = vec![false; stats.len()];
    keep.iter().for_each(|&c| kept[c] = true);
    let report = FilterReport {
        columns: stats
            .iter()
            .enumerate()
            .map(|(c, s)| ColumnSummary {
                term: m.terms[c].clone(),
                column: c,
                doc_freq: s.doc_freq,
                variance: s.variance,
                retained: kept[c],
            })
            .collect(),
    };
    Ok((m.select_columns(&keep)?, report))
}
