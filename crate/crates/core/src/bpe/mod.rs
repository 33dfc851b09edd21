//! Word-level byte-pair encoding.
//!
//! Tokens never cross word boundaries and there is no end-of-word marker.
//! A [`MergeTable`] holds the base alphabet and the ordered merge list; the
//! creation rank of a token is its 1-based position in the order tokens
//! entered the vocabulary (alphabet first, then merge products).

mod encode;
mod graph;
mod train;

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::glottoset::{io_or_malformed, Glottoset, MergedGlottoset};

pub use encode::{tokenization_tree, TokenTree};
pub use graph::{diff_merge_tables, merge_graph, GraphNode, MergeDiff, MergeGraph};
pub use train::train_bpe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Stop once the vocabulary holds this many tokens.
    FixedVocab(usize),
    /// Stop once no pair occurs more than once.
    Ultimate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::FixedVocab(n) => write!(f, "fixed:{n}"),
            Mode::Ultimate => f.write_str("ultimate"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ultimate" {
            return Ok(Mode::Ultimate);
        }
        s.strip_prefix("fixed:")
            .and_then(|n| n.parse().ok())
            .map(Mode::FixedVocab)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mode {s:?}")))
    }
}

/// How pair frequencies are weighted during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Weighting {
    /// Each word counts with its term frequency.
    #[default]
    Tf,
    /// Each distinct word counts once.
    Types,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Tf => "tf",
            Weighting::Types => "types",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tf" => Ok(Weighting::Tf),
            "types" => Ok(Weighting::Types),
            _ => Err(Error::InvalidParameter(format!("unknown weighting {s:?}"))),
        }
    }
}

/// Anything that can be trained on: a list of words with term frequencies.
pub trait Lexicon {
    fn language_code(&self) -> &str;
    fn word_frequencies(&self) -> Vec<(&str, u64)>;
}

impl Lexicon for Glottoset {
    fn language_code(&self) -> &str {
        &self.language_code
    }

    fn word_frequencies(&self) -> Vec<(&str, u64)> {
        self.entries
            .iter()
            .map(|(w, f)| (w.as_str(), f.tf))
            .collect()
    }
}

impl Lexicon for MergedGlottoset {
    fn language_code(&self) -> &str {
        "merged"
    }

    fn word_frequencies(&self) -> Vec<(&str, u64)> {
        self.entries
            .iter()
            .map(|(w, f)| (w.as_str(), f.tf))
            .collect()
    }
}

/// A plain word list, mostly for tests and synthetic lexicons.
#[derive(Debug, Clone, Default)]
pub struct WordList {
    pub language_code: String,
    pub words: Vec<(String, u64)>,
}

impl WordList {
    pub fn new<S: Into<String>>(
        language_code: &str,
        words: impl IntoIterator<Item = (S, u64)>,
    ) -> Self {
        WordList {
            language_code: language_code.to_string(),
            words: words.into_iter().map(|(w, tf)| (w.into(), tf)).collect(),
        }
    }
}

impl Lexicon for WordList {
    fn language_code(&self) -> &str {
        &self.language_code
    }

    fn word_frequencies(&self) -> Vec<(&str, u64)> {
        self.words.iter().map(|(w, tf)| (w.as_str(), *tf)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Merge {
    pub left: String,
    pub right: String,
}

impl Merge {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        Merge {
            left: left.into(),
            right: right.into(),
        }
    }

    pub fn product(&self) -> String {
        format!("{}{}", self.left, self.right)
    }
}

/// Base alphabet plus ordered merges: a trained tokenizer.
///
/// Two merges may produce the same string (`ab+c` and `a+bc`); the token
/// keeps the rank of its first creation, so `vocab_size()` can be smaller
/// than `alphabet.len() + merges.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTable {
    pub language_code: String,
    pub mode: Mode,
    pub weighting: Weighting,
    alphabet: Vec<String>,
    merges: Vec<Merge>,
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    // (left id, right id) -> ascending (merge index, product id); a pair can
    // be merged again after a duplicate product recreates it.
    merge_lookup: HashMap<(u32, u32), Vec<(u32, u32)>>,
}

impl MergeTable {
    /// Builds a table from an alphabet and a merge list, checking that every
    /// merge operand exists before the merge.
    pub fn new(
        language_code: impl Into<String>,
        mode: Mode,
        weighting: Weighting,
        alphabet: Vec<String>,
        merges: Vec<Merge>,
    ) -> Result<Self> {
        let mut table = MergeTable {
            language_code: language_code.into(),
            mode,
            weighting,
            alphabet: Vec::with_capacity(alphabet.len()),
            merges: Vec::with_capacity(merges.len()),
            tokens: Vec::new(),
            ids: HashMap::new(),
            merge_lookup: HashMap::new(),
        };
        for symbol in alphabet {
            if symbol.chars().count() != 1 {
                return Err(Error::InvalidParameter(format!(
                    "alphabet entry {symbol:?} is not a single character"
                )));
            }
            if table.ids.contains_key(&symbol) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate alphabet entry {symbol:?}"
                )));
            }
            table.intern(&symbol);
            table.alphabet.push(symbol);
        }
        for merge in merges {
            table.push_merge(merge)?;
        }
        Ok(table)
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    pub(crate) fn push_merge(&mut self, merge: Merge) -> Result<u32> {
        let (Some(&l), Some(&r)) = (self.ids.get(&merge.left), self.ids.get(&merge.right)) else {
            return Err(Error::InvalidParameter(format!(
                "merge {:?} + {:?} uses a token that does not exist yet",
                merge.left, merge.right
            )));
        };
        let product = self.intern(&merge.product());
        self.merge_lookup
            .entry((l, r))
            .or_default()
            .push((self.merges.len() as u32, product));
        self.merges.push(merge);
        Ok(product)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// All distinct tokens in creation order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    /// 1-based creation rank.
    pub fn creation_rank(&self, token: &str) -> Option<u32> {
        self.ids.get(token).map(|id| id + 1)
    }

    pub(crate) fn token_id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub(crate) fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// First merge of `(left, right)` at or after merge index `from`.
    pub(crate) fn lookup_merge(&self, left: u32, right: u32, from: u32) -> Option<(u32, u32)> {
        let entries = self.merge_lookup.get(&(left, right))?;
        let at = entries.partition_point(|&(idx, _)| idx < from);
        entries.get(at).copied()
    }

    /// Splits `word` into tokens by replaying merges in creation order.
    /// Characters missing from the alphabet come out as single-char tokens.
    pub fn encode_word(&self, word: &str) -> Vec<String> {
        encode::encode(self, word)
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(
            writer,
            "lang={}\tmode={}\tweighting={}",
            self.language_code, self.mode, self.weighting
        )?;
        for symbol in &self.alphabet {
            writeln!(writer, "{symbol}")?;
        }
        writeln!(writer)?;
        for m in &self.merges {
            writeln!(writer, "{}\t{}", m.left, m.right)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("tokens are UTF-8")
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| io_or_malformed(e, 1))?,
            None => return Err(Error::malformed(1, "missing header")),
        };
        let (mut lang, mut mode, mut weighting) = (None, None, None);
        for field in header.trim_end_matches('\r').split('\t') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::malformed(1, format!("bad header field {field:?}")))?;
            match key {
                "lang" => lang = Some(value.to_string()),
                "mode" => {
                    mode = Some(
                        value
                            .parse::<Mode>()
                            .map_err(|e| Error::malformed(1, e.to_string()))?,
                    )
                }
                "weighting" => {
                    weighting = Some(
                        value
                            .parse::<Weighting>()
                            .map_err(|e| Error::malformed(1, e.to_string()))?,
                    )
                }
                _ => return Err(Error::malformed(1, format!("unknown header key {key:?}"))),
            }
        }
        let (Some(lang), Some(mode), Some(weighting)) = (lang, mode, weighting) else {
            return Err(Error::malformed(1, "header needs lang, mode and weighting"));
        };

        let mut table = MergeTable::new(lang, mode, weighting, Vec::new(), Vec::new())?;
        let mut in_merges = false;
        let mut last_line = 1;
        for (idx, line) in lines {
            let lineno = idx + 1;
            last_line = lineno;
            let line = line.map_err(|e| io_or_malformed(e, lineno))?;
            let line = line.trim_end_matches('\r');
            if !in_merges {
                if line.is_empty() {
                    in_merges = true;
                    continue;
                }
                if line.chars().count() != 1 || table.contains(line) {
                    return Err(Error::malformed(
                        lineno,
                        format!("bad alphabet entry {line:?}"),
                    ));
                }
                table.intern(line);
                table.alphabet.push(line.to_string());
            } else {
                if line.is_empty() {
                    continue;
                }
                let (left, right) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::malformed(lineno, "expected left<TAB>right"))?;
                table
                    .push_merge(Merge::new(left, right))
                    .map_err(|e| Error::malformed(lineno, e.to_string()))?;
            }
        }
        if !in_merges {
            return Err(Error::malformed(
                last_line + 1,
                "missing blank line after the alphabet",
            ));
        }
        Ok(table)
    }
}
