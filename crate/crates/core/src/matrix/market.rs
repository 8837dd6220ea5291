//! Matrix Market files: coordinate `pattern` for document-term matrices
//! (with `.terms` / `.docs` sidecars) and dense `array` for correlation dumps.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::DocTermMatrix;
use crate::error::{Error, Result};
use crate::Scalar;

/// Paths of a saved matrix: `<stem>.mtx`, `<stem>.terms`, `<stem>.docs`.
#[derive(Debug, Clone)]
pub struct MatrixFiles {
    pub mtx: PathBuf,
    pub terms: PathBuf,
    pub docs: PathBuf,
}

impl MatrixFiles {
    pub fn new(dir: &Path, stem: &str) -> Self {
        MatrixFiles {
            mtx: dir.join(format!("{stem}.mtx")),
            terms: dir.join(format!("{stem}.terms")),
            docs: dir.join(format!("{stem}.docs")),
        }
    }

    pub fn all(&self) -> [&Path; 3] {
        [&self.mtx, &self.terms, &self.docs]
    }
}

pub fn write_pattern<W: Write>(m: &DocTermMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate pattern general")?;
    writeln!(out, "% rows: documents, columns: terms")?;
    writeln!(out, "{} {} {}", m.n_docs(), m.n_terms(), m.nnz())?;
    for (d, row) in m.rows().iter().enumerate() {
        for &c in row {
            writeln!(out, "{} {}", d + 1, c + 1)?;
        }
    }
    Ok(())
}

fn header_tokens(line: &str) -> Vec<String> {
    line.split_ascii_whitespace().map(str::to_ascii_lowercase).collect()
}

/// Read a coordinate pattern (or integer/real with value 1) general matrix.
///
/// Returns `(n_rows, n_cols, rows)` with each row sorted and deduplicated.
pub fn read_pattern<R: BufRead>(input: R, label: &str) -> Result<(usize, usize, Vec<Vec<u32>>)> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(label, 1, "empty Matrix Market file"))?;
    let header = header.map_err(|e| Error::io(label, e))?;
    let h = header_tokens(&header);
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(Error::parse(label, 1, "expected `%%MatrixMarket matrix coordinate ...` header"));
    }
    let valued = match h[3].as_str() {
        "pattern" => false,
        "integer" | "real" => true,
        other => return Err(Error::parse(label, 1, format!("unsupported field `{other}`"))),
    };
    if h[4] != "general" {
        return Err(Error::parse(label, 1, "document-term matrices must be `general`"));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut seen = 0usize;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let nums: Vec<&str> = t.split_ascii_whitespace().collect();
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::parse(label, line_no, format!("bad integer `{s}`")))
        };
        match dims {
            None => {
                if nums.len() != 3 {
                    return Err(Error::parse(label, line_no, "expected `rows cols entries`"));
                }
                let d = (parse(nums[0])?, parse(nums[1])?, parse(nums[2])?);
                if d.1 > u32::MAX as usize {
                    return Err(Error::parse(label, line_no, "too many columns"));
                }
                rows = vec![Vec::new(); d.0];
                dims = Some(d);
            }
            Some((n_rows, n_cols, _)) => {
                let want = if valued { 3 } else { 2 };
                if nums.len() != want {
                    return Err(Error::parse(label, line_no, format!("expected {want} fields")));
                }
                let (r, c) = (parse(nums[0])?, parse(nums[1])?);
                if r == 0 || r > n_rows || c == 0 || c > n_cols {
                    return Err(Error::parse(label, line_no, "entry index out of range"));
                }
                if valued {
                    let v: f64 = nums[2]
                        .parse()
                        .map_err(|_| Error::parse(label, line_no, "bad value"))?;
                    if v != 1.0 {
                        return Err(Error::parse(label, line_no, "binary matrix entries must be 1"));
                    }
                }
                rows[r - 1].push((c - 1) as u32);
                seen += 1;
            }
        }
    }
    let (n_rows, n_cols, nnz) =
        dims.ok_or_else(|| Error::parse(label, 0, "missing size line"))?;
    if seen != nnz {
        return Err(Error::parse(label, 0, format!("declared {nnz} entries, found {seen}")));
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    Ok((n_rows, n_cols, rows))
}

fn write_lines<'a>(path: &Path, items: impl Iterator<Item = &'a str>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        if item.contains(['\n', '\r']) {
            return Err(Error::Validation(format!(
                "`{}` cannot be stored one-per-line in {}",
                item.escape_debug(),
                path.display()
            )));
        }
        writeln!(w, "{item}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_owned).collect())
}

/// Write `<stem>.mtx` plus term and document-id sidecars.
pub fn save_matrix(m: &DocTermMatrix, files: &MatrixFiles) -> Result<()> {
    let file = File::create(&files.mtx).map_err(|e| Error::io(&files.mtx, e))?;
    let mut w = BufWriter::new(file);
    write_pattern(m, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&files.mtx, e))?;
    write_lines(&files.terms, m.terms().iter().map(String::as_str))?;
    write_lines(&files.docs, m.doc_ids().iter().map(String::as_str))
}

pub fn load_matrix(files: &MatrixFiles) -> Result<DocTermMatrix> {
    for p in files.all() {
        if !p.is_file() {
            return Err(Error::Dependency(p.to_path_buf()));
        }
    }
    let label = files.mtx.display().to_string();
    let file = File::open(&files.mtx).map_err(|e| Error::io(&files.mtx, e))?;
    let (n_rows, n_cols, rows) = read_pattern(BufReader::new(file), &label)?;
    let terms = read_lines(&files.terms)?;
    let docs = read_lines(&files.docs)?;
    if terms.len() != n_cols || docs.len() != n_rows {
        return Err(Error::Validation(format!(
            "{label} is {n_rows}x{n_cols} but sidecars list {} documents and {} terms",
            docs.len(),
            terms.len()
        )));
    }
    DocTermMatrix::new(docs, terms, rows)
}

/// Dense symmetric matrix in `array real symmetric` layout (lower triangle, column-major).
pub fn write_array_symmetric<T: Scalar, W: Write>(values: &Array2<T>, mut out: W) -> std::io::Result<()> {
    let (n, m) = values.dim();
    assert_eq!(n, m, "symmetric dump needs a square matrix");
    writeln!(out, "%%MatrixMarket matrix array real symmetric")?;
    writeln!(out, "{n} {n}")?;
    for j in 0..n {
        for i in j..n {
            writeln!(out, "{}", values[[i, j]].to_f64_lossy())?;
        }
    }
    Ok(())
}

/// Read an `array real` matrix, `general` or `symmetric`.
pub fn read_array<R: BufRead>(input: R, label: &str) -> Result<Array2<f64>> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(label, 1, "empty Matrix Market file"))?;
    let h = header_tokens(&header.map_err(|e| Error::io(label, e))?);
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[2] != "array" || h[3] != "real" {
        return Err(Error::parse(label, 1, "expected `%%MatrixMarket matrix array real ...` header"));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::parse(label, 1, format!("unsupported symmetry `{other}`"))),
    };
    let mut dims = None;
    let mut values = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(label, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if dims.is_none() {
            let d: Vec<usize> = t
                .split_ascii_whitespace()
                .map(|s| s.parse().map_err(|_| Error::parse(label, i + 1, "bad size line")))
                .collect::<Result<_>>()?;
            if d.len() != 2 || (symmetric && d[0] != d[1]) {
                return Err(Error::parse(label, i + 1, "bad size line"));
            }
            dims = Some((d[0], d[1]));
            continue;
        }
        values.push(
            t.parse::<f64>()
                .map_err(|_| Error::parse(label, i + 1, format!("bad value `{t}`")))?,
        );
    }
    let (n, m) = dims.ok_or_else(|| Error::parse(label, 0, "missing size line"))?;
    let expected = if symmetric { n * (n + 1) / 2 } else { n * m };
    if values.len() != expected {
        return Err(Error::parse(label, 0, format!("expected {expected} values, found {}", values.len())));
    }
    let mut out = Array2::zeros((n, m));
    let mut it = values.into_iter();
    for j in 0..m {
        let start = if symmetric { j } else { 0 };
        for i in start..n {
            let v = it.next().unwrap_or_default();
            out[[i, j]] = v;
            if symmetric {
                out[[j, i]] = v;
            }
        }
    }
    Ok(out)
}
