#![allow(dead_code)]

//! Reference implementations used as test oracles. Deliberately naive: every
//! quantity is recomputed from scratch.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use glottobpe::{Mode, Weighting};

/// Recount-everything BPE trainer. Returns (alphabet, merges).
pub fn naive_train(
    words: &[(String, u64)],
    mode: Mode,
    weighting: Weighting,
) -> (Vec<String>, Vec<(String, String)>) {
    let mut lexicon: BTreeMap<String, u64> = BTreeMap::new();
    for (w, tf) in words {
        if !w.is_empty() && *tf > 0 {
            *lexicon.entry(w.clone()).or_insert(0) += tf;
        }
    }
    let weight = |tf: u64| -> i64 {
        match weighting {
            Weighting::Tf => tf as i64,
            Weighting::Types => 1,
        }
    };

    let mut char_freq: BTreeMap<char, i64> = BTreeMap::new();
    for (w, &tf) in &lexicon {
        for c in w.chars() {
            *char_freq.entry(c).or_insert(0) += weight(tf);
        }
    }
    let mut alphabet: Vec<(char, i64)> = char_freq.into_iter().collect();
    alphabet.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let alphabet: Vec<String> = alphabet.into_iter().map(|(c, _)| c.to_string()).collect();

    let mut segmented: Vec<(Vec<String>, i64)> = lexicon
        .iter()
        .map(|(w, &tf)| (w.chars().map(|c| c.to_string()).collect(), weight(tf)))
        .collect();
    let mut vocab: BTreeSet<String> = alphabet.iter().cloned().collect();
    let mut merges = Vec::new();

    loop {
        if let Mode::FixedVocab(target) = mode {
            if vocab.len() >= target {
                break;
            }
        }
        let mut counts: HashMap<(String, String), i64> = HashMap::new();
        for (symbols, w) in &segmented {
            for pair in symbols.windows(2) {
                *counts
                    .entry((pair[0].clone(), pair[1].clone()))
                    .or_insert(0) += w;
            }
        }
        let best = counts
            .into_iter()
            .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then(pb.0.cmp(&pa.0)).then(pb.1.cmp(&pa.1)));
        let Some(((left, right), count)) = best else {
            break;
        };
        if count <= 1 {
            break;
        }
        for (symbols, _) in &mut segmented {
            *symbols = apply_merge(symbols, &left, &right);
        }
        vocab.insert(format!("{left}{right}"));
        merges.push((left, right));
    }
    (alphabet, merges)
}

pub fn apply_merge(symbols: &[String], left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
            out.push(format!("{left}{right}"));
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

/// Encodes by walking the entire merge list once, in order.
pub fn naive_encode(alphabet: &[String], merges: &[(String, String)], word: &str) -> Vec<String> {
    let _ = alphabet;
    let mut symbols: Vec<String> = word.chars().map(|c| c.to_string()).collect();
    for (l, r) in merges {
        symbols = apply_merge(&symbols, l, r);
    }
    symbols
}

/// Pearson correlation of the upper triangles, explicit double loop.
pub fn naive_pearson(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            xs.push(a[i][j]);
            ys.push(b[i][j]);
        }
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for k in 0..xs.len() {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Mantel test recomputing the permuted matrix explicitly for every permutation.
/// Permutation k is a fresh identity vector shuffled by a ChaCha8 stream seeded once.
pub fn naive_mantel(a: &[Vec<f64>], b: &[Vec<f64>], permutations: usize, seed: u64) -> (f64, f64) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let n = a.len();
    let observed = naive_pearson(a, b);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..permutations {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| b[perm[i]][perm[j]]).collect())
            .collect();
        if naive_pearson(a, &permuted) >= observed {
            hits += 1;
        }
    }
    (observed, (1 + hits) as f64 / (1 + permutations) as f64)
}
