use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Lexicon, Pos, SenseId};
use crate::error::{Error, Result};
use crate::ingest::{tokenize, Review};

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Lowercase words dropped before lemmatization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// The bundled list of English function words.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub lemma: String,
    pub pos: Pos,
    /// Number of corpus documents containing the lemma.
    pub doc_freq: usize,
}

/// Ordered noun/adjective vocabulary; column `i` of a document-term matrix is `terms[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermDictionary {
    terms: Vec<Term>,
    index: HashMap<String, usize>,
}

impl TermDictionary {
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if t.lemma.is_empty() || t.lemma.chars().any(char::is_uppercase) {
                return Err(Error::Validation(format!("term `{}` is not a lowercase lemma", t.lemma)));
            }
            if index.insert(t.lemma.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate term `{}`", t.lemma)));
            }
        }
        Ok(TermDictionary { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.lemma.as_str())
    }

    pub fn position(&self, lemma: &str) -> Option<usize> {
        self.index.get(lemma).copied()
    }

    /// Tab-separated `term  pos  doc_freq` with a header row.
    pub fn write_tsv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
        let io = |e: csv::Error| Error::Io {
            path: "dictionary".into(),
            source: e.into(),
        };
        w.write_record(["term", "pos", "doc_freq"]).map_err(io)?;
        for t in &self.terms {
            w.write_record([t.lemma.as_str(), t.pos.as_str(), &t.doc_freq.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("dictionary", e))?;
        Ok(())
    }

    pub fn read_tsv<R: Read>(input: R, label: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .has_headers(true)
            .from_reader(input);
        let mut terms = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::parse(label, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != 3 {
                return Err(Error::parse(label, line, "expected term, pos, doc_freq"));
            }
            let pos = rec[1].parse::<Pos>().map_err(|e| Error::parse(label, line, e.to_string()))?;
            let doc_freq = rec[2]
                .parse()
                .map_err(|_| Error::parse(label, line, "bad doc_freq"))?;
            terms.push(Term {
                lemma: rec[0].to_owned(),
                pos,
                doc_freq,
            });
        }
        Self::from_terms(terms)
    }
}

#[derive(Default)]
struct Candidate {
    doc_freq: usize,
    noun: bool,
    adjective: bool,
}

/// Build the term dictionary for `corpus`.
///
/// Stopwords are removed, the remaining tokens lemmatized (noun first, then
/// adjective) and deduplicated at the lemma level. Candidates are ranked by
/// document frequency (descending, ties alphabetical) and admitted greedily:
/// a candidate sharing a sense with an admitted term, or antonym to one of
/// its senses, is rejected.
pub fn build_dictionary(
    corpus: &[Review],
    lex: &Lexicon,
    stopwords: &StopWords,
) -> Result<TermDictionary> {
    let per_doc: Vec<Vec<(&str, Pos)>> = corpus
        .par_iter()
        .map(|review| {
            let mut seen: BTreeSet<(&str, Pos)> = BTreeSet::new();
            for token in tokenize(&review.text) {
                if stopwords.contains(token.as_str()) {
                    continue;
                }
                if let Some(hit) = lex.lemmatize_token(token.as_str()) {
                    seen.insert(hit);
                }
            }
            seen.into_iter().collect()
        })
        .collect();

    let mut counts: HashMap<&str, Candidate> = HashMap::new();
    for doc in &per_doc {
        let mut lemmas_in_doc: HashSet<&str> = HashSet::new();
        for &(lemma, pos) in doc {
            let c = counts.entry(lemma).or_default();
            match pos {
                Pos::Noun => c.noun = true,
                Pos::Adjective => c.adjective = true,
            }
            if lemmas_in_doc.insert(lemma) {
                c.doc_freq += 1;
            }
        }
    }

    let mut ranked: Vec<(&str, Candidate)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.doc_freq.cmp(&a.1.doc_freq).then_with(|| a.0.cmp(b.0)));

    let mut admitted_senses: HashSet<SenseId> = HashSet::new();
    let mut terms = Vec::new();
    for (lemma, cand) in ranked {
        let mut senses: Vec<SenseId> = Vec::new();
        if cand.noun {
            senses.extend_from_slice(lex.senses(lemma, Pos::Noun));
        }
        if cand.adjective {
            senses.extend_from_slice(lex.senses(lemma, Pos::Adjective));
        }
        let conflicts = senses.iter().any(|s| {
            admitted_senses.contains(s)
                || lex.antonyms_of(*s).iter().any(|a| admitted_senses.contains(a))
        });
        if conflicts {
            continue;
        }
        admitted_senses.extend(senses);
        terms.push(Term {
            lemma: lemma.to_owned(),
            pos: if cand.noun { Pos::Noun } else { Pos::Adjective },
            doc_freq: cand.doc_freq,
        });
    }
    if terms.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    TermDictionary::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::tests::toy;

    fn review(id: &str, text: &str) -> Review {
        Review {
            id: id.to_owned(),
            source: "t".to_owned(),
            text: text.to_owned(),
        }
    }

    #[test]
    fn stopword_and_lemma_dedup() {
        let lex = toy();
        let corpus = vec![review("1", "the tickets ticket")];
        let stop: StopWords = ["the"].into_iter().collect();
        let dict = build_dictionary(&corpus, &lex, &stop).unwrap();
        assert_eq!(dict.lemmas().collect::<Vec<_>>(), ["ticket"]);
        assert_eq!(dict.terms()[0].doc_freq, 1);
    }

    #[test]
    fn empty_corpus_is_error() {
        let lex = toy();
        assert!(matches!(
            build_dictionary(&[], &lex, &StopWords::english()),
            Err(Error::EmptyDictionary)
        ));
    }

    #[test]
    fn antonym_of_more_frequent_term_rejected() {
        let lex = toy();
        let corpus = vec![
            review("1", "good ticket"),
            review("2", "better boxes"),
            review("3", "bad"),
        ];
        let dict = build_dictionary(&corpus, &lex, &StopWords::default()).unwrap();
        // good: df 2, bad: df 1 and antonym of good.
        assert_eq!(dict.position("good"), Some(0));
        assert_eq!(dict.position("bad"), None);
        assert_eq!(dict.len(), 3);
    }

    #[test]
    fn ties_broken_alphabetically() {
        let lex = toy();
        let corpus = vec![review("1", "tickets boxes cities")];
        let dict = build_dictionary(&corpus, &lex, &StopWords::default()).unwrap();
        assert_eq!(dict.lemmas().collect::<Vec<_>>(), ["box", "city", "ticket"]);
    }

    #[test]
    fn tsv_round_trip() {
        let lex = toy();
        let corpus = vec![review("1", "tickets good"), review("2", "tickets")];
        let dict = build_dictionary(&corpus, &lex, &StopWords::default()).unwrap();
        let mut buf = Vec::new();
        dict.write_tsv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "term\tpos\tdoc_freq\nticket\tnoun\t2\ngood\tadjective\t1\n"
        );
        assert_eq!(TermDictionary::read_tsv(&buf[..], "mem").unwrap(), dict);
    }

    #[test]
    fn duplicate_terms_rejected() {
        let t = Term {
            lemma: "a".into(),
            pos: Pos::Noun,
            doc_freq: 1,
        };
        assert!(TermDictionary::from_terms(vec![t.clone(), t]).is_err());
    }

    #[test]
    fn bundled_stopwords() {
        let s = StopWords::english();
        assert!(s.contains("the") && s.contains("was"));
        assert!(!s.contains("ticket"));
    }
}
