//! Review corpora from local JSON-lines or CSV files, and tokenization.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One user review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub source: String,
    pub text: String,
}

/// A lowercase, letters-only word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// Guess from the file extension: `.csv` is CSV, everything else JSON-lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::Config(format!("unknown review format `{other}`"))),
        }
    }
}

#[derive(Deserialize)]
struct RawReview {
    id: Option<serde_json::Value>,
    source: Option<String>,
    text: Option<String>,
}

/// Load every review from `path`, in file order.
pub fn load_reviews(path: &Path, format: InputFormat) -> Result<Vec<Review>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    match format {
        InputFormat::Jsonl => read_jsonl(BufReader::new(file), &label),
        InputFormat::Csv => read_csv(file, &label),
    }
}

/// Parse JSON-lines review records. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R, label: &str) -> Result<Vec<Review>> {
    let mut reviews = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawReview = serde_json::from_str(&line)
            .map_err(|e| Error::parse(label, line_no, format!("malformed JSON record: {e}")))?;
        let id = match raw.id {
            Some(serde_json::Value::String(s)) => Some(s),
            Some(serde_json::Value::Number(n)) => Some(n.to_string()),
            Some(_) => return Err(schema(label, line_no, "`id` must be a string")),
            None => None,
        };
        let review = validate(id, raw.source, raw.text, label, line_no)?;
        push_unique(&mut reviews, &mut seen, review, line_no)?;
    }
    Ok(reviews)
}

/// Parse CSV review records with an `id,source,text` header (any column order).
pub fn read_csv<R: Read>(reader: R, label: &str) -> Result<Vec<Review>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(label, 1, e.to_string()))?
        .clone();
    // An empty file has no header row at all.
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, source_col, text_col) = (col("id"), col("source"), col("text"));
    if id_col.is_none() {
        return Err(schema(label, 1, "missing `id` column"));
    }
    if text_col.is_none() {
        return Err(schema(label, 1, "missing `text` column"));
    }

    let mut reviews = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(label, line, format!("malformed CSV record: {e}"))
        })?;
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |c: Option<usize>| c.and_then(|c| record.get(c)).map(str::to_owned);
        let review = validate(field(id_col), field(source_col), field(text_col), label, line_no)?;
        push_unique(&mut reviews, &mut seen, review, line_no)?;
    }
    Ok(reviews)
}

fn schema(label: &str, line: usize, msg: &str) -> Error {
    Error::Schema {
        path: label.to_owned(),
        line,
        msg: msg.to_owned(),
    }
}

fn validate(
    id: Option<String>,
    source: Option<String>,
    text: Option<String>,
    label: &str,
    line: usize,
) -> Result<Review> {
    let id = id.ok_or_else(|| schema(label, line, "missing `id` field"))?;
    let text = text.ok_or_else(|| schema(label, line, "missing `text` field"))?;
    if id.is_empty() {
        return Err(schema(label, line, "empty `id`"));
    }
    if text.trim().is_empty() {
        return Err(schema(label, line, "`text` is empty"));
    }
    Ok(Review {
        id,
        source: source.unwrap_or_default(),
        text,
    })
}

fn push_unique(
    reviews: &mut Vec<Review>,
    seen: &mut HashSet<String>,
    review: Review,
    line: usize,
) -> Result<()> {
    if !seen.insert(review.id.clone()) {
        return Err(Error::DuplicateId {
            id: review.id,
            line,
        });
    }
    reviews.push(review);
    Ok(())
}

/// Serialize reviews as JSON-lines, one object per line.
pub fn write_jsonl<W: Write>(reviews: &[Review], mut out: W) -> std::io::Result<()> {
    for r in reviews {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Lowercase `text` and split it on every non-alphabetic character.
pub fn tokenize(text: &str) -> Vec<Token> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphabetic())
        .filter(|s| !s.is_empty())
        .map(|s| Token(s.to_owned()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(Token::into_string).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(words("The chatbot was great!"), ["the", "chatbot", "was", "great"]);
        assert!(words("").is_empty());
        assert_eq!(words("AI-powered suite"), ["ai", "powered", "suite"]);
        assert_eq!(words("GPT4o rocks"), ["gpt", "o", "rocks"]);
        assert_eq!(words("Überraschend GUT"), ["überraschend", "gut"]);
    }

    #[test]
    fn jsonl_in_file_order() {
        let input = r#"{"id":"a","source":"g2","text":"first"}
{"id":"b","source":"g2","text":"second"}
"#;
        let reviews = read_jsonl(input.as_bytes(), "mem").unwrap();
        assert_eq!(reviews.len(), 2);
        assert_eq!(reviews[0].id, "a");
        assert_eq!(reviews[1].text, "second");
    }

    #[test]
    fn empty_jsonl_is_empty_corpus() {
        assert!(read_jsonl("".as_bytes(), "mem").unwrap().is_empty());
    }

    #[test]
    fn missing_text_is_schema_error_at_line() {
        let input = "{\"id\":\"a\",\"text\":\"ok\"}\n{\"id\":\"b\",\"source\":\"x\"}\n";
        match read_jsonl(input.as_bytes(), "mem") {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_names_line() {
        let input = "{\"id\":\"a\",\"text\":\"ok\"}\n\n{\"id\": oops}\n";
        match read_jsonl(input.as_bytes(), "mem") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let input = "{\"id\":\"a\",\"text\":\"one\"}\n{\"id\":\"a\",\"text\":\"two\"}\n";
        assert!(matches!(
            read_jsonl(input.as_bytes(), "mem"),
            Err(Error::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn blank_text_rejected() {
        let input = "{\"id\":\"a\",\"text\":\"   \"}\n";
        assert!(matches!(read_jsonl(input.as_bytes(), "mem"), Err(Error::Schema { .. })));
    }

    #[test]
    fn csv_with_quoting() {
        let input = "id,source,text\nr1,g2,\"Great, \"\"fast\"\" support\"\nr2,ph,plain\n";
        let reviews = read_csv(input.as_bytes(), "mem").unwrap();
        assert_eq!(reviews.len(), 2);
        assert_eq!(reviews[0].text, "Great, \"fast\" support");
        assert_eq!(reviews[1].source, "ph");
    }

    #[test]
    fn csv_missing_text_column() {
        let input = "id,source\nr1,g2\n";
        assert!(matches!(read_csv(input.as_bytes(), "mem"), Err(Error::Schema { .. })));
    }

    #[test]
    fn csv_empty_file() {
        assert!(read_csv("".as_bytes(), "mem").unwrap().is_empty());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(InputFormat::from_path(Path::new("a/b.CSV")), InputFormat::Csv);
        assert_eq!(InputFormat::from_path(Path::new("a/b.jsonl")), InputFormat::Jsonl);
    }
}
