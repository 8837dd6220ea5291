use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::{Lexicon, Pos, SenseId};
use crate::error::{Error, Result};

const ANTONYM: &str = "!";

/// Files read from a database directory.
pub const DATABASE_FILES: [&str; 6] = ["index.noun", "index.adj", "data.noun", "data.adj", "noun.exc", "adj.exc"];

struct SynsetRecord {
    antonyms: Vec<SenseId>,
}

fn file_stem(pos: Pos) -> &'static str {
    match pos {
        Pos::Noun => "noun",
        Pos::Adjective => "adj",
    }
}

fn pos_from_char(c: &str) -> Option<Pos> {
    match c {
        "n" => Some(Pos::Noun),
        "a" | "s" => Some(Pos::Adjective),
        _ => None,
    }
}

/// Read a WordNet-layout database directory.
///
/// Requires `index.noun`, `index.adj`, `data.noun`, `data.adj`, `noun.exc`
/// and `adj.exc`. Antonym pointers (`!`) between loaded synsets become
/// antonym pairs; pointers into other parts of speech are ignored.
pub fn parse_lexical_database(dir: &Path) -> Result<Lexicon> {
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "lexical database directory {} does not exist",
            dir.display()
        )));
    }
    let read = |name: String| -> Result<(std::path::PathBuf, String)> {
        let path = dir.join(&name);
        if !path.is_file() {
            return Err(Error::Config(format!(
                "lexical database file {} is missing",
                path.display()
            )));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, text))
    };

    let mut synsets: HashMap<SenseId, SynsetRecord> = HashMap::new();
    let mut texts = Vec::new();
    for pos in Pos::ALL {
        let stem = file_stem(pos);
        let data = read(format!("data.{stem}"))?;
        let index = read(format!("index.{stem}"))?;
        let exc = read(format!("{stem}.exc"))?;
        parse_data(&data.0, &data.1, pos, &mut synsets)?;
        texts.push((pos, index, exc));
    }

    let senses: HashSet<SenseId> = synsets.keys().copied().collect();
    let mut antonym_pairs = Vec::new();
    for (&id, rec) in &synsets {
        for &target in &rec.antonyms {
            if !senses.contains(&target) {
                return Err(Error::Parse {
                    path: dir.join(format!("data.{}", file_stem(id.pos))).display().to_string(),
                    line: 0,
                    msg: format!(
                        "antonym pointer from {:08} to missing synset {:08}",
                        id.offset, target.offset
                    ),
                });
            }
            antonym_pairs.push((id, target));
        }
    }
    antonym_pairs.sort();

    let mut entries = Vec::new();
    let mut exceptions = Vec::new();
    for (pos, (index_path, index_text), (exc_path, exc_text)) in texts {
        parse_index(&index_path, &index_text, pos, &senses, &mut entries)?;
        parse_exceptions(&exc_path, &exc_text, pos, &mut exceptions)?;
    }
    Lexicon::from_parts(entries, exceptions, antonym_pairs, &senses)
}

fn is_header(line: &str) -> bool {
    line.starts_with("  ") || line.trim().is_empty()
}

fn parse_data(
    path: &Path,
    text: &str,
    pos: Pos,
    out: &mut HashMap<SenseId, SynsetRecord>,
) -> Result<()> {
    for (i, line) in text.lines().enumerate() {
        if is_header(line) {
            continue;
        }
        let line_no = i + 1;
        let err = |msg: &str| Error::parse(path, line_no, msg);
        let body = line.split_once(" | ").map_or(line, |(b, _)| b);
        let mut fields = body.split_ascii_whitespace();
        let mut next = |what: &str| fields.next().ok_or_else(|| err(&format!("missing {what}")));

        let offset: u64 = next("synset offset")?
            .parse()
            .map_err(|_| err("bad synset offset"))?;
        let _lex_filenum = next("lexicographer file number")?;
        let ss_type = next("synset type")?;
        if pos_from_char(ss_type) != Some(pos) {
            return Err(err(&format!("synset type `{ss_type}` in {pos} data file")));
        }
        let w_cnt = usize::from_str_radix(next("word count")?, 16)
            .map_err(|_| err("bad word count"))?;
        for _ in 0..w_cnt {
            next("word")?;
            next("lex id")?;
        }
        let p_cnt: usize = next("pointer count")?
            .parse()
            .map_err(|_| err("bad pointer count"))?;
        let mut antonyms = Vec::new();
        for _ in 0..p_cnt {
            let symbol = next("pointer symbol")?;
            let target: u64 = next("pointer offset")?
                .parse()
                .map_err(|_| err("bad pointer offset"))?;
            let target_pos = next("pointer part of speech")?;
            let source_target = next("pointer source/target")?;
            if source_target.len() != 4 || u16::from_str_radix(source_target, 16).is_err() {
                return Err(err("bad pointer source/target field"));
            }
            if symbol == ANTONYM {
                if let Some(tp) = pos_from_char(target_pos) {
                    antonyms.push(SenseId::new(tp, target));
                }
            }
        }
        let id = SenseId::new(pos, offset);
        if out.insert(id, SynsetRecord { antonyms }).is_some() {
            return Err(err(&format!("duplicate synset offset {offset:08}")));
        }
    }
    Ok(())
}

fn parse_index(
    path: &Path,
    text: &str,
    pos: Pos,
    senses: &HashSet<SenseId>,
    out: &mut Vec<(String, Pos, Vec<SenseId>)>,
) -> Result<()> {
    for (i, line) in text.lines().enumerate() {
        if is_header(line) {
            continue;
        }
        let line_no = i + 1;
        let err = |msg: &str| Error::parse(path, line_no, msg);
        let mut fields = line.split_ascii_whitespace();
        let mut next = |what: &str| fields.next().ok_or_else(|| err(&format!("missing {what}")));

        let lemma = next("lemma")?.to_lowercase();
        let p = next("part of speech")?;
        if pos_from_char(p) != Some(pos) {
            return Err(err(&format!("part of speech `{p}` in {pos} index file")));
        }
        let synset_cnt: usize = next("synset count")?
            .parse()
            .map_err(|_| err("bad synset count"))?;
        let p_cnt: usize = next("pointer count")?
            .parse()
            .map_err(|_| err("bad pointer count"))?;
        for _ in 0..p_cnt {
            next("pointer symbol")?;
        }
        let _sense_cnt = next("sense count")?;
        let _tagsense_cnt = next("tagged sense count")?;
        let mut ids = Vec::with_capacity(synset_cnt);
        for _ in 0..synset_cnt {
            let offset: u64 = next("synset offset")?
                .parse()
                .map_err(|_| err("bad synset offset"))?;
            let id = SenseId::new(pos, offset);
            if !senses.contains(&id) {
                return Err(err(&format!("synset offset {offset:08} not in data file")));
            }
            ids.push(id);
        }
        if ids.is_empty() {
            return Err(err("lemma without synsets"));
        }
        out.push((lemma, pos, ids));
    }
    Ok(())
}

fn parse_exceptions(
    path: &Path,
    text: &str,
    pos: Pos,
    out: &mut Vec<(String, Pos, Vec<String>)>,
) -> Result<()> {
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let form = fields.next().unwrap_or_default().to_lowercase();
        let bases: Vec<String> = fields.map(str::to_lowercase).collect();
        if bases.is_empty() {
            return Err(Error::parse(path, i + 1, "exception line without base form"));
        }
        out.push((form, pos, bases));
    }
    Ok(())
}
