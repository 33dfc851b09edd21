use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use log::debug;

use super::{Lexicon, Merge, MergeTable, Mode, Weighting};
use crate::error::{Error, Result};

type Pair = (u32, u32);

/// Heap entry. `count` may be stale; it is checked against the live count on pop.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    count: i64,
    left: Arc<str>,
    right: Arc<str>,
    pair: Pair,
}

impl Ord for Candidate {
    // Highest count first; ties go to the lexicographically smaller left, then right token.
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Trainer {
    table: MergeTable,
    names: Vec<Arc<str>>,
    words: Vec<Vec<u32>>,
    weights: Vec<i64>,
    counts: HashMap<Pair, i64>,
    // Word ids that contain (or once contained) a pair. May hold stale ids.
    occurrences: HashMap<Pair, Vec<u32>>,
    heap: BinaryHeap<Candidate>,
}

impl Trainer {
    fn sync_names(&mut self) {
        while self.names.len() < self.table.vocab_size() {
            let id = self.names.len() as u32;
            self.names.push(Arc::from(self.table.token(id)));
        }
    }

    fn candidate(&self, pair: Pair, count: i64) -> Candidate {
        Candidate {
            count,
            left: self.names[pair.0 as usize].clone(),
            right: self.names[pair.1 as usize].clone(),
            pair,
        }
    }

    /// Pops the best live pair, repairing stale entries on the way.
    fn best_pair(&mut self) -> Option<(Pair, i64)> {
        while let Some(top) = self.heap.pop() {
            let live = self.counts.get(&top.pair).copied().unwrap_or(0);
            if live == top.count {
                return Some((top.pair, live));
            }
            if live > 0 {
                let fresh = self.candidate(top.pair, live);
                self.heap.push(fresh);
            }
        }
        None
    }

    fn apply(&mut self, pair: Pair, product: u32) {
        let Some(mut word_ids) = self.occurrences.remove(&pair) else {
            return;
        };
        word_ids.sort_unstable();
        word_ids.dedup();

        let mut delta: HashMap<Pair, i64> = HashMap::new();
        let mut merged = Vec::new();
        for wid in word_ids {
            let symbols = &self.words[wid as usize];
            if !symbols.windows(2).any(|w| (w[0], w[1]) == pair) {
                continue;
            }
            let weight = self.weights[wid as usize];
            merged.clear();
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && (symbols[i], symbols[i + 1]) == pair {
                    merged.push(product);
                    i += 2;
                } else {
                    merged.push(symbols[i]);
                    i += 1;
                }
            }
            for w in symbols.windows(2) {
                *delta.entry((w[0], w[1])).or_insert(0) -= weight;
            }
            for w in merged.windows(2) {
                let p = (w[0], w[1]);
                *delta.entry(p).or_insert(0) += weight;
                if p.0 == product || p.1 == product {
                    self.occurrences.entry(p).or_default().push(wid);
                }
            }
            std::mem::swap(&mut self.words[wid as usize], &mut merged);
        }

        let mut raised: Vec<Pair> = Vec::new();
        for (p, d) in delta {
            if d == 0 {
                continue;
            }
            let c = self.counts.entry(p).or_insert(0);
            *c += d;
            debug_assert!(*c >= 0);
            if *c == 0 {
                self.counts.remove(&p);
            } else if d > 0 {
                raised.push(p);
            }
        }
        for p in raised {
            let c = self.counts[&p];
            let entry = self.candidate(p, c);
            self.heap.push(entry);
        }
    }
}

/// Trains a word-level BPE table.
///
/// Each step merges the adjacent pair with the highest weighted frequency
/// across the lexicon; ties go to the lexicographically smaller left token,
/// then right token. Training stops when the best pair occurs at most once,
/// or (for [`Mode::FixedVocab`]) when the vocabulary reaches the target.
pub fn train_bpe<L: Lexicon + ?Sized>(
    source: &L,
    mode: Mode,
    weighting: Weighting,
) -> Result<MergeTable> {
    let mut merged_words: HashMap<&str, u64> = HashMap::new();
    for (word, tf) in source.word_frequencies() {
        if word.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(Error::InvalidWord(word.to_string()));
        }
        if word.is_empty() || tf == 0 {
            continue;
        }
        *merged_words.entry(word).or_insert(0) += tf;
    }
    if merged_words.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    let mut lexicon: Vec<(&str, i64)> = merged_words
        .into_iter()
        .map(|(w, tf)| {
            let weight = match weighting {
                Weighting::Tf => tf as i64,
                Weighting::Types => 1,
            };
            (w, weight)
        })
        .collect();
    lexicon.sort_unstable();

    let mut char_freq: HashMap<char, i64> = HashMap::new();
    for &(word, weight) in &lexicon {
        for c in word.chars() {
            *char_freq.entry(c).or_insert(0) += weight;
        }
    }
    let mut alphabet: Vec<(char, i64)> = char_freq.into_iter().collect();
    alphabet.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let alphabet: Vec<String> = alphabet.into_iter().map(|(c, _)| c.to_string()).collect();

    if let Mode::FixedVocab(target) = mode {
        if target < alphabet.len() {
            return Err(Error::TargetBelowAlphabet {
                target,
                alphabet: alphabet.len(),
            });
        }
    }

    let table = MergeTable::new(
        source.language_code(),
        mode,
        weighting,
        alphabet,
        Vec::new(),
    )?;

    let mut trainer = Trainer {
        table,
        names: Vec::new(),
        words: Vec::new(),
        weights: Vec::new(),
        counts: HashMap::new(),
        occurrences: HashMap::new(),
        heap: BinaryHeap::new(),
    };
    trainer.sync_names();

    for &(word, weight) in &lexicon {
        let symbols: Vec<u32> = word
            .chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                trainer
                    .table
                    .token_id(c.encode_utf8(&mut buf))
                    .expect("alphabet covers the lexicon")
            })
            .collect();
        if symbols.len() < 2 {
            continue;
        }
        let wid = trainer.words.len() as u32;
        for w in symbols.windows(2) {
            let p = (w[0], w[1]);
            *trainer.counts.entry(p).or_insert(0) += weight;
            trainer.occurrences.entry(p).or_default().push(wid);
        }
        trainer.words.push(symbols);
        trainer.weights.push(weight);
    }
    let initial: Vec<Candidate> = trainer
        .counts
        .iter()
        .map(|(&p, &c)| trainer.candidate(p, c))
        .collect();
    trainer.heap = BinaryHeap::from(initial);

    loop {
        if let Mode::FixedVocab(target) = mode {
            if trainer.table.vocab_size() >= target {
                break;
            }
        }
        let Some((pair, count)) = trainer.best_pair() else {
            break;
        };
        if count <= 1 {
            break;
        }
        let merge = Merge::new(trainer.table.token(pair.0), trainer.table.token(pair.1));
        let product = trainer.table.push_merge(merge)?;
        trainer.sync_names();
        trainer.apply(pair, product);
    }

    debug!(
        "trained {} merges, vocabulary {}",
        trainer.table.merges().len(),
        trainer.table.vocab_size()
    );
    Ok(trainer.table)
}
