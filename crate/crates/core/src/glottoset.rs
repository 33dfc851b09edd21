//! Per-language lexicons with term and document frequencies.
//!
//! TSV layout: header `word\ttf\tdf` (merged files add `\tn_langs`), rows
//! sorted by descending tf, then word.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::corpus::{classify_script, Paragraph, Script, ScriptCounts};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Frequency {
    /// Total occurrences.
    pub tf: u64,
    /// Number of paragraphs containing the word.
    pub df: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glottoset {
    pub language_code: String,
    pub script: Script,
    pub entries: HashMap<String, Frequency>,
}

/// Dominant script over all letters, each word weighted by its tf.
fn lexicon_script<'a>(words: impl Iterator<Item = (&'a String, u64)>) -> Script {
    let mut total = ScriptCounts::default();
    for (word, tf) in words {
        let c = classify_script(word);
        total.latin += c.latin * tf;
        total.cyrillic += c.cyrillic * tf;
        total.other += c.other * tf;
    }
    total.dominant()
}

impl Glottoset {
    pub fn from_entries(
        language_code: impl Into<String>,
        entries: HashMap<String, Frequency>,
    ) -> Self {
        let script = lexicon_script(entries.iter().map(|(w, f)| (w, f.tf)));
        Glottoset {
            language_code: language_code.into(),
            script,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<Frequency> {
        self.entries.get(word).copied()
    }

    pub fn total_tokens(&self) -> u64 {
        self.entries.values().map(|f| f.tf).sum()
    }

    /// Entries in file order: descending tf, then word.
    pub fn sorted_entries(&self) -> Vec<(&str, Frequency)> {
        let mut rows: Vec<_> = self.entries.iter().map(|(w, f)| (w.as_str(), *f)).collect();
        rows.sort_by(|a, b| b.1.tf.cmp(&a.1.tf).then_with(|| a.0.cmp(b.0)));
        rows
    }

    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "word\ttf\tdf")?;
        for (word, f) in self.sorted_entries() {
            writeln!(writer, "{word}\t{}\t{}", f.tf, f.df)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R, language_code: impl Into<String>) -> Result<Self> {
        let rows = read_rows(reader, &["word", "tf", "df"])?;
        let mut entries = HashMap::with_capacity(rows.len());
        for (line, fields) in rows {
            let tf = parse_count(&fields[1], line)?;
            let df = parse_count(&fields[2], line)?;
            check_frequency(tf, df, line)?;
            if entries
                .insert(fields[0].clone(), Frequency { tf, df })
                .is_some()
            {
                return Err(Error::malformed(
                    line,
                    format!("duplicate word {:?}", fields[0]),
                ));
            }
        }
        Ok(Glottoset::from_entries(language_code, entries))
    }
}

/// Counts tf and paragraph-level df over a script-filtered paragraph stream.
pub fn build_glottoset<'a, I>(paragraphs: I, language_code: &str) -> Glottoset
where
    I: IntoIterator<Item = &'a Paragraph>,
{
    let mut entries: HashMap<String, Frequency> = HashMap::new();
    let mut seen = HashSet::new();
    for p in paragraphs {
        seen.clear();
        for word in p.words() {
            let entry = entries.entry(word.clone()).or_default();
            entry.tf += 1;
            if seen.insert(word) {
                entry.df += 1;
            }
        }
    }
    Glottoset::from_entries(language_code, entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MergedFrequency {
    pub tf: u64,
    pub df: u64,
    /// Number of contributing languages in which the word appears.
    pub n_langs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MergedGlottoset {
    /// Contributing language codes, sorted.
    pub languages: BTreeSet<String>,
    pub entries: HashMap<String, MergedFrequency>,
}

impl MergedGlottoset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<MergedFrequency> {
        self.entries.get(word).copied()
    }

    fn absorb(&mut self, g: &Glottoset) -> Result<()> {
        if !self.languages.insert(g.language_code.clone()) {
            return Err(Error::DuplicateLanguage(g.language_code.clone()));
        }
        for (word, f) in &g.entries {
            let e = self.entries.entry(word.clone()).or_default();
            e.tf += f.tf;
            e.df += f.df;
            e.n_langs += 1;
        }
        Ok(())
    }

    /// Union of two merged sets built from disjoint language lists.
    pub fn combine(mut self, other: &MergedGlottoset) -> Result<Self> {
        if let Some(dup) = self.languages.intersection(&other.languages).next() {
            return Err(Error::DuplicateLanguage(dup.clone()));
        }
        self.languages.extend(other.languages.iter().cloned());
        for (word, f) in &other.entries {
            let e = self.entries.entry(word.clone()).or_default();
            e.tf += f.tf;
            e.df += f.df;
            e.n_langs += f.n_langs;
        }
        Ok(self)
    }

    pub fn sorted_entries(&self) -> Vec<(&str, MergedFrequency)> {
        let mut rows: Vec<_> = self.entries.iter().map(|(w, f)| (w.as_str(), *f)).collect();
        rows.sort_by(|a, b| b.1.tf.cmp(&a.1.tf).then_with(|| a.0.cmp(b.0)));
        rows
    }

    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "word\ttf\tdf\tn_langs")?;
        for (word, f) in self.sorted_entries() {
            writeln!(writer, "{word}\t{}\t{}\t{}", f.tf, f.df, f.n_langs)?;
        }
        Ok(())
    }

    /// Reads a merged TSV. The contributing language list is not stored in
    /// the file and comes back empty.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let rows = read_rows(reader, &["word", "tf", "df", "n_langs"])?;
        let mut entries = HashMap::with_capacity(rows.len());
        for (line, fields) in rows {
            let tf = parse_count(&fields[1], line)?;
            let df = parse_count(&fields[2], line)?;
            check_frequency(tf, df, line)?;
            let n_langs = parse_count(&fields[3], line)?;
            if n_langs == 0 || n_langs > u32::MAX as u64 {
                return Err(Error::malformed(line, "n_langs out of range"));
            }
            let f = MergedFrequency {
                tf,
                df,
                n_langs: n_langs as u32,
            };
            if entries.insert(fields[0].clone(), f).is_some() {
                return Err(Error::malformed(
                    line,
                    format!("duplicate word {:?}", fields[0]),
                ));
            }
        }
        Ok(MergedGlottoset {
            languages: BTreeSet::new(),
            entries,
        })
    }
}

/// Sums tf and df per word and counts contributing languages.
pub fn merge_glottosets<'a, I>(glottosets: I) -> Result<MergedGlottoset>
where
    I: IntoIterator<Item = &'a Glottoset>,
{
    let mut merged = MergedGlottoset::default();
    let mut count = 0;
    for g in glottosets {
        merged.absorb(g)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::TooFewInputs { needed: 1, got: 0 });
    }
    Ok(merged)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalStats {
    pub vocab_size: usize,
    /// Type/token ratio.
    pub lexical_diversity: f64,
    /// Median length in characters over distinct words.
    pub median_word_length: f64,
    pub top_k_tokens: Vec<String>,
}

pub fn lexical_diversity(vocab_size: u64, total_tokens: u64) -> Result<f64> {
    if vocab_size == 0 {
        return Err(Error::EmptyLexicon);
    }
    if total_tokens < vocab_size {
        return Err(Error::InvalidParameter(format!(
            "total tokens ({total_tokens}) is smaller than vocabulary size ({vocab_size})"
        )));
    }
    Ok(vocab_size as f64 / total_tokens as f64)
}

pub fn median(values: &mut [usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    } else {
        values[mid] as f64
    })
}

pub fn lexical_stats(glottoset: &Glottoset, total_tokens: u64, k: usize) -> Result<LexicalStats> {
    let vocab_size = glottoset.len();
    let lexical_diversity = lexical_diversity(vocab_size as u64, total_tokens)?;
    let mut lengths: Vec<usize> = glottoset
        .entries
        .keys()
        .map(|w| w.chars().count())
        .collect();
    let median_word_length = median(&mut lengths).ok_or(Error::EmptyLexicon)?;
    let top_k_tokens = glottoset
        .sorted_entries()
        .into_iter()
        .take(k)
        .map(|(w, _)| w.to_string())
        .collect();
    Ok(LexicalStats {
        vocab_size,
        lexical_diversity,
        median_word_length,
        top_k_tokens,
    })
}

/// Writes one stats row per language in the column order of a lexical summary table.
pub fn write_stats_tsv<'a, W: Write>(
    mut writer: W,
    rows: impl IntoIterator<Item = (&'a str, Script, &'a LexicalStats)>,
) -> Result<()> {
    writeln!(
        writer,
        "language\tscript\tvocab_size\tlexical_diversity\tmedian_word_length\ttop_tokens"
    )?;
    for (lang, script, s) in rows {
        writeln!(
            writer,
            "{lang}\t{script}\t{}\t{:.6}\t{}\t{}",
            s.vocab_size,
            s.lexical_diversity,
            s.median_word_length,
            s.top_k_tokens.join(", ")
        )?;
    }
    Ok(())
}

fn check_frequency(tf: u64, df: u64, line: usize) -> Result<()> {
    if df == 0 || df > tf {
        return Err(Error::malformed(
            line,
            format!("need tf >= df >= 1, got tf={tf} df={df}"),
        ));
    }
    Ok(())
}

fn parse_count(field: &str, line: usize) -> Result<u64> {
    field.parse::<u64>().map_err(|_| {
        Error::malformed(
            line,
            format!("expected a non-negative integer, got {field:?}"),
        )
    })
}

/// Reads a TSV with an exact header; returns `(line_number, fields)` rows.
pub(crate) fn read_rows<R: BufRead>(
    reader: R,
    header: &[&str],
) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = reader.lines().enumerate();
    let expected = header.join("\t");
    match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| io_or_malformed(e, 1))?;
            if line.trim_end_matches('\r') != expected {
                return Err(Error::malformed(1, format!("expected header {expected:?}")));
            }
        }
        None => return Err(Error::malformed(1, "missing header")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| io_or_malformed(e, lineno))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(Error::malformed(
                lineno,
                format!("expected {} fields, got {}", header.len(), fields.len()),
            ));
        }
        if fields[0].is_empty() {
            return Err(Error::malformed(lineno, "empty first field"));
        }
        rows.push((lineno, fields));
    }
    Ok(rows)
}

pub(crate) fn io_or_malformed(e: std::io::Error, line: usize) -> Error {
    if e.kind() == std::io::ErrorKind::InvalidData {
        Error::malformed(line, "invalid UTF-8")
    } else {
        Error::Io(e)
    }
}
