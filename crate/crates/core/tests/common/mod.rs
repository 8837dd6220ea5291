#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn lexicon_dir() -> PathBuf {
    fixtures().join("wordnet")
}

pub fn corpus(name: &str) -> PathBuf {
    fixtures().join("corpus").join(name)
}

pub fn lexfactor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexfactor"))
        .args(args)
        .output()
        .expect("run lexfactor")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Every regular file under `dir`, by name, with its bytes.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

/// A config file for the themed fixture corpus, written into `dir`.
pub fn themed_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.toml");
    let text = format!(
        "reviews = {:?}\nlexicon = {:?}\nlabels = {:?}\nfactors = \"fixed:3\"\n{extra}",
        corpus("themed.jsonl"),
        lexicon_dir(),
        corpus("labels.json"),
    );
    std::fs::write(&path, text).unwrap();
    path
}

use lexfactor::ingest::Review;
use lexfactor::lexicon::{Lexicon, Pos, StopWords};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Base-form words of `lex` that lemmatize to themselves, are not stopwords
/// and share no sense or antonym with each other; sorted.
pub fn independent_words(lex: &Lexicon) -> Vec<String> {
    let stop = StopWords::english();
    let mut words: Vec<String> = Pos::ALL
        .iter()
        .flat_map(|&pos| lex.lemmas(pos).map(str::to_owned).collect::<Vec<_>>())
        .collect();
    words.sort();
    words.dedup();
    let mut taken = std::collections::HashSet::new();
    let mut out = Vec::new();
    for w in words {
        if stop.contains(&w) {
            continue;
        }
        let Some((lemma, pos)) = lex.lemmatize_token(&w) else { continue };
        if lemma != w {
            continue;
        }
        let senses = lex.senses(&w, pos);
        let clash = senses
            .iter()
            .any(|s| taken.contains(s) || lex.antonyms_of(*s).iter().any(|a| taken.contains(a)));
        // Words reachable under the other part of speech could still clash there.
        let other = match pos {
            Pos::Noun => Pos::Adjective,
            Pos::Adjective => Pos::Noun,
        };
        if clash || lex.contains(&w, other) {
            continue;
        }
        taken.extend(senses.iter().copied());
        out.push(w);
    }
    out
}

/// Reviews from planted word groups: each group is switched on per review
/// with probability `on`; its words then appear with probability `hit`,
/// otherwise with probability `miss`. Noise words appear with `noise`.
pub struct PlantedCorpus<'a> {
    pub groups: Vec<Vec<&'a str>>,
    pub noise_words: Vec<&'a str>,
    pub on: f64,
    pub hit: f64,
    pub miss: f64,
    pub noise: f64,
}

impl PlantedCorpus<'_> {
    pub fn generate(&self, n_docs: usize, seed: u64) -> Vec<Review> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filler = ["the", "and", "was", "it", "very", "with"];
        (0..n_docs)
            .map(|d| {
                let mut words: Vec<String> = Vec::new();
                for g in &self.groups {
                    let p = if rng.random_bool(self.on) { self.hit } else { self.miss };
                    for w in g {
                        if rng.random_bool(p) {
                            words.push(w.to_string());
                        }
                    }
                }
                for w in &self.noise_words {
                    if rng.random_bool(self.noise) {
                        words.push(w.to_string());
                    }
                }
                words.push(filler[rng.random_range(0..filler.len())].to_string());
                let text = words.join(" ");
                Review {
                    id: format!("d{d:06}"),
                    source: "synthetic".into(),
                    text,
                }
            })
            .collect()
    }
}
