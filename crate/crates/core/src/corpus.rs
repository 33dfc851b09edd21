//! Paragraph ingestion: script classification, word extraction, paragraph
//! filtering and cross-script contamination counts.
//!
//! Input corpora are UTF-8 text with one paragraph per line.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::AddAssign;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Writing system of a character, word or paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Script {
    Latin,
    Cyrillic,
    Other,
}

impl Script {
    pub const ALL: [Script; 3] = [Script::Latin, Script::Cyrillic, Script::Other];

    /// Script of a single alphabetic character, by code point block.
    pub fn of_char(c: char) -> Script {
        let cp = c as u32;
        match cp {
            0x41..=0x5A | 0x61..=0x7A | 0xAA | 0xBA => Script::Latin,
            0xC0..=0xFF if cp != 0xD7 && cp != 0xF7 => Script::Latin,
            // Latin Extended-A/B, IPA Extensions
            0x0100..=0x02AF => Script::Latin,
            0x1D00..=0x1D7F | 0x1E00..=0x1EFF => Script::Latin,
            0x2C60..=0x2C7F | 0xA720..=0xA7FF | 0xAB30..=0xAB6F => Script::Latin,
            0xFB00..=0xFB06 => Script::Latin,
            // Cyrillic, Supplement, Extended-A/B/C
            0x0400..=0x052F | 0x1C80..=0x1C8F | 0x2DE0..=0x2DFF | 0xA640..=0xA69F => {
                Script::Cyrillic
            }
            _ => Script::Other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Script::Latin => "latin",
            Script::Cyrillic => "cyrillic",
            Script::Other => "other",
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Script {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "latin" | "latn" => Ok(Script::Latin),
            "cyrillic" | "cyrl" => Ok(Script::Cyrillic),
            "other" => Ok(Script::Other),
            _ => Err(Error::InvalidParameter(format!("unknown script {s:?}"))),
        }
    }
}

/// Per-script counts. Used both for characters and for word tokens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScriptCounts {
    pub latin: u64,
    pub cyrillic: u64,
    pub other: u64,
}

impl ScriptCounts {
    pub fn get(&self, script: Script) -> u64 {
        match script {
            Script::Latin => self.latin,
            Script::Cyrillic => self.cyrillic,
            Script::Other => self.other,
        }
    }

    pub fn add(&mut self, script: Script, n: u64) {
        match script {
            Script::Latin => self.latin += n,
            Script::Cyrillic => self.cyrillic += n,
            Script::Other => self.other += n,
        }
    }

    pub fn total(&self) -> u64 {
        self.latin + self.cyrillic + self.other
    }

    /// The script whose count is strictly larger than both others.
    /// Ties and all-zero counts give `Other`.
    pub fn dominant(&self) -> Script {
        let (l, c, o) = (self.latin, self.cyrillic, self.other);
        if l > c && l > o {
            Script::Latin
        } else if c > l && c > o {
            Script::Cyrillic
        } else {
            Script::Other
        }
    }
}

impl AddAssign for ScriptCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.latin += rhs.latin;
        self.cyrillic += rhs.cyrillic;
        self.other += rhs.other;
    }
}

/// Counts alphabetic characters of `text` by script. Non-letters are skipped.
pub fn classify_script(text: &str) -> ScriptCounts {
    let mut counts = ScriptCounts::default();
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        counts.add(Script::of_char(c), 1);
    }
    counts
}

fn word_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"[\p{L}\p{M}]+").expect("valid word pattern"))
}

/// Simple (one-to-one) lowercase mapping.
fn simple_lowercase(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        // U+0130 is the only multi-char lowercase; its simple mapping is the first char.
        (Some(l), Some(_)) => l,
        _ => c,
    }
}

/// Splits a paragraph into lowercased words: maximal runs of letters and
/// combining marks, after NFC normalization. Everything else separates words.
pub fn extract_words(paragraph_text: &str) -> Vec<String> {
    let normalized: String = paragraph_text.nfc().collect();
    word_pattern()
        .find_iter(&normalized)
        .map(|m| m.as_str().chars().map(simple_lowercase).nfc().collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub text: String,
    pub word_count: usize,
    pub dominant_script: Script,
}

impl Paragraph {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let word_count = extract_words(&text).len();
        let dominant_script = classify_script(&text).dominant();
        Paragraph {
            text,
            word_count,
            dominant_script,
        }
    }

    pub fn words(&self) -> Vec<String> {
        extract_words(&self.text)
    }
}

/// Reads one paragraph per line. Blank lines are skipped.
pub fn read_paragraphs<R: BufRead>(reader: R) -> Result<Vec<Paragraph>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::malformed(idx + 1, "invalid UTF-8"),
            _ => Error::Io(e),
        })?;
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        out.push(Paragraph::new(text));
    }
    Ok(out)
}

pub fn write_paragraphs<'a, W: Write>(
    mut writer: W,
    paragraphs: impl IntoIterator<Item = &'a Paragraph>,
) -> Result<()> {
    for p in paragraphs {
        writeln!(writer, "{}", p.text)?;
    }
    Ok(())
}

/// Keeps paragraphs with at least `min_words` words whose dominant script is
/// `target`. Order is preserved.
pub fn filter_paragraphs<I>(
    paragraphs: I,
    target: Script,
    min_words: usize,
) -> impl Iterator<Item = Paragraph>
where
    I: IntoIterator<Item = Paragraph>,
{
    paragraphs
        .into_iter()
        .filter(move |p| p.word_count >= min_words && p.dominant_script == target)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContaminationReport {
    pub counts: ScriptCounts,
    pub native_script: Script,
}

impl ContaminationReport {
    pub fn total(&self) -> u64 {
        self.counts.total()
    }

    /// Word tokens attributed to a script other than the native one.
    pub fn foreign(&self) -> u64 {
        self.total() - self.counts.get(self.native_script)
    }

    pub fn merge(&mut self, other: &ContaminationReport) {
        self.counts += other.counts;
    }

    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "script\ttoken_count")?;
        for script in Script::ALL {
            writeln!(writer, "{}\t{}", script, self.counts.get(script))?;
        }
        Ok(())
    }
}

/// Attributes every word token to the majority script of its letters.
pub fn contamination_report<'a, I>(paragraphs: I, native_script: Script) -> ContaminationReport
where
    I: IntoIterator<Item = &'a Paragraph>,
{
    let mut counts = ScriptCounts::default();
    for p in paragraphs {
        for word in p.words() {
            counts.add(classify_script(&word).dominant(), 1);
        }
    }
    ContaminationReport {
        counts,
        native_script,
    }
}
