//! Rank vectors over a universal vocabulary and subword language identification.
//!
//! A token's rank in a language is its creation rank in that language's
//! merge table. Scores are dissimilarities: lower means more likely.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use crate::bpe::MergeTable;
use crate::corpus::extract_words;
use crate::error::{Error, Result};
use crate::glottoset::io_or_malformed;

/// Default extra cost of a token that a language lacks, on top of 1.0.
pub const DEFAULT_MISSING_PENALTY: f64 = 0.5;

const VOCAB_ROW: &str = "#vocab_size";

/// Creation rank of a token in one language. `Missing` sorts after every real rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Present(u32),
    Missing,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Present(r) => write!(f, "{r}"),
            Rank::Missing => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    tokens: Vec<String>,
    languages: Vec<String>,
    vocab_sizes: Vec<usize>,
    /// Row per token, column per language.
    ranks: Vec<Vec<Rank>>,
    rows: HashMap<String, usize>,
}

impl RankMatrix {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn vocab_sizes(&self) -> &[usize] {
        &self.vocab_sizes
    }

    pub fn row(&self, token: &str) -> Option<&[Rank]> {
        self.rows.get(token).map(|&i| self.ranks[i].as_slice())
    }

    pub fn rank(&self, token: &str, language: &str) -> Option<Rank> {
        let col = self.languages.iter().position(|l| l == language)?;
        Some(self.row(token).map_or(Rank::Missing, |r| r[col]))
    }

    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "token\t{}", self.languages.join("\t"))?;
        let sizes: Vec<String> = self.vocab_sizes.iter().map(|s| s.to_string()).collect();
        writeln!(writer, "{VOCAB_ROW}\t{}", sizes.join("\t"))?;
        for (token, row) in self.tokens.iter().zip(&self.ranks) {
            write!(writer, "{token}")?;
            for r in row {
                write!(writer, "\t{r}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next_line = |expect: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l.map_err(|e| io_or_malformed(e, i + 1))?)),
                None => Err(Error::malformed(0, format!("missing {expect}"))),
            }
        };
        let (_, header) = next_line("header")?;
        let mut fields = header.trim_end_matches('\r').split('\t');
        if fields.next() != Some("token") {
            return Err(Error::malformed(1, "header must start with \"token\""));
        }
        let languages: Vec<String> = fields.map(str::to_string).collect();
        if languages.is_empty() {
            return Err(Error::malformed(1, "no language columns"));
        }
        check_unique(&languages).map_err(|e| Error::malformed(1, e.to_string()))?;

        let (lineno, sizes_line) = next_line("vocabulary size row")?;
        let sizes: Vec<&str> = sizes_line.trim_end_matches('\r').split('\t').collect();
        if sizes.first() != Some(&VOCAB_ROW) || sizes.len() != languages.len() + 1 {
            return Err(Error::malformed(
                lineno,
                format!("expected a {VOCAB_ROW} row"),
            ));
        }
        let vocab_sizes = sizes[1..]
            .iter()
            .map(|s| match s.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(Error::malformed(
                    lineno,
                    format!("bad vocabulary size {s:?}"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;

        let mut tokens = Vec::new();
        let mut ranks = Vec::new();
        let mut rows = HashMap::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|e| io_or_malformed(e, lineno))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != languages.len() + 1 || fields[0].is_empty() {
                return Err(Error::malformed(lineno, "wrong number of columns"));
            }
            let mut row = Vec::with_capacity(languages.len());
            for (col, f) in fields[1..].iter().enumerate() {
                let rank = if *f == "-" {
                    Rank::Missing
                } else {
                    match f.parse::<u32>() {
                        Ok(r) if r >= 1 && (r as usize) <= vocab_sizes[col] => Rank::Present(r),
                        _ => return Err(Error::malformed(lineno, format!("bad rank {f:?}"))),
                    }
                };
                row.push(rank);
            }
            if rows.insert(fields[0].to_string(), tokens.len()).is_some() {
                return Err(Error::malformed(
                    lineno,
                    format!("duplicate token {:?}", fields[0]),
                ));
            }
            tokens.push(fields[0].to_string());
            ranks.push(row);
        }
        Ok(RankMatrix {
            tokens,
            languages,
            vocab_sizes,
            ranks,
            rows,
        })
    }
}

fn check_unique<S: AsRef<str>>(codes: &[S]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in codes {
        if !seen.insert(c.as_ref()) {
            return Err(Error::DuplicateLanguage(c.as_ref().to_string()));
        }
    }
    Ok(())
}

/// One row per token of the universal table, one column per language, in
/// the given order.
pub fn build_rank_matrix(
    universal: &MergeTable,
    per_language: &[(&str, &MergeTable)],
) -> Result<RankMatrix> {
    if per_language.is_empty() {
        return Err(Error::TooFewInputs { needed: 1, got: 0 });
    }
    let languages: Vec<String> = per_language.iter().map(|(c, _)| c.to_string()).collect();
    check_unique(&languages)?;
    let tokens = universal.tokens().to_vec();
    let ranks = tokens
        .iter()
        .map(|t| {
            per_language
                .iter()
                .map(|(_, table)| table.creation_rank(t).map_or(Rank::Missing, Rank::Present))
                .collect()
        })
        .collect();
    let rows = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(RankMatrix {
        tokens,
        languages,
        vocab_sizes: per_language.iter().map(|(_, t)| t.vocab_size()).collect(),
        ranks,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fertility,
    RankVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageScore {
    pub language_code: String,
    pub score: f64,
    pub method: Method,
}

fn input_words(text: &str) -> Result<Vec<String>> {
    let words = extract_words(text);
    if words.is_empty() {
        return Err(Error::EmptyInput("input text"));
    }
    Ok(words)
}

/// Scores each language by the number of tokens its table needs for the
/// input. Fewer tokens first; equal counts are then ordered by longer mean
/// token length and finally by language code.
pub fn identify_language_fertility(
    text: &str,
    tokenizers: &[(&str, &MergeTable)],
) -> Result<Vec<LanguageScore>> {
    check_unique(&tokenizers.iter().map(|(c, _)| *c).collect::<Vec<_>>())?;
    let words = input_words(text)?;
    let chars: usize = words.iter().map(|w| w.chars().count()).sum();
    let mut scored: Vec<(LanguageScore, f64)> = tokenizers
        .iter()
        .map(|(code, table)| {
            let tokens: usize = words.iter().map(|w| table.encode_word(w).len()).sum();
            let mean_len = chars as f64 / tokens as f64;
            (
                LanguageScore {
                    language_code: code.to_string(),
                    score: tokens as f64,
                    method: Method::Fertility,
                },
                mean_len,
            )
        })
        .collect();
    scored.sort_by(|(a, la), (b, lb)| {
        a.score
            .total_cmp(&b.score)
            .then(lb.total_cmp(la))
            .then_with(|| a.language_code.cmp(&b.language_code))
    });
    Ok(scored.into_iter().map(|(s, _)| s).collect())
}

/// Encodes the text with the universal table and scores each language by the
/// mean normalized rank `rank / vocab_size` of the tokens. A token the
/// language lacks costs `1 + missing_penalty`.
pub fn identify_language_rank(
    text: &str,
    universal: &MergeTable,
    matrix: &RankMatrix,
    missing_penalty: f64,
) -> Result<Vec<LanguageScore>> {
    if missing_penalty.is_nan() || missing_penalty <= 0.0 {
        return Err(Error::InvalidParameter(
            "missing penalty must be positive".into(),
        ));
    }
    let tokens: Vec<String> = extract_words(text)
        .iter()
        .flat_map(|w| universal.encode_word(w))
        .collect();
    if tokens.is_empty() {
        return Err(Error::NoTokens);
    }
    let n_langs = matrix.languages.len();
    let mut sums = vec![0.0f64; n_langs];
    for token in &tokens {
        let row = matrix.row(token);
        for (col, sum) in sums.iter_mut().enumerate() {
            *sum += match row.map_or(Rank::Missing, |r| r[col]) {
                Rank::Present(r) => r as f64 / matrix.vocab_sizes[col] as f64,
                Rank::Missing => 1.0 + missing_penalty,
            };
        }
    }
    let mut scores: Vec<LanguageScore> = matrix
        .languages
        .iter()
        .zip(sums)
        .map(|(code, sum)| LanguageScore {
            language_code: code.clone(),
            score: sum / tokens.len() as f64,
            method: Method::RankVector,
        })
        .collect();
    sort_scores(&mut scores);
    Ok(scores)
}

fn sort_scores(scores: &mut [LanguageScore]) {
    scores.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.language_code.cmp(&b.language_code))
    });
}

/// Softmax over negated scores. `temperature` must be positive.
pub fn score_distribution(scores: &[LanguageScore], temperature: f64) -> Vec<(String, f64)> {
    let Some(best) = scores.iter().map(|s| s.score).min_by(f64::total_cmp) else {
        return Vec::new();
    };
    let weights: Vec<f64> = scores
        .iter()
        .map(|s| (-(s.score - best) / temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    scores
        .iter()
        .zip(weights)
        .map(|(s, w)| (s.language_code.clone(), w / total))
        .collect()
}

pub fn write_scores<W: Write>(mut writer: W, scores: &[LanguageScore]) -> Result<()> {
    for s in scores {
        writeln!(writer, "{}\t{}", s.language_code, s.score)?;
    }
    Ok(())
}
