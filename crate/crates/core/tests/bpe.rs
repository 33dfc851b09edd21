mod support;

use std::collections::HashMap;

use glottobpe::bpe::{diff_merge_tables, merge_graph, tokenization_tree, train_bpe};
use glottobpe::{Error, Merge, MergeTable, Mode, Weighting, WordList};
use proptest::prelude::*;
use regex::Regex;

fn lexicon(words: &[(&str, u64)]) -> WordList {
    WordList::new("xx", words.iter().map(|&(w, tf)| (w, tf)))
}

fn merge_pairs(table: &MergeTable) -> Vec<(String, String)> {
    table
        .merges()
        .iter()
        .map(|m| (m.left.clone(), m.right.clone()))
        .collect()
}

#[test]
fn abab_ultimate() {
    let t = train_bpe(&lexicon(&[("abab", 10)]), Mode::Ultimate, Weighting::Tf).unwrap();
    assert_eq!(t.merges(), [Merge::new("a", "b"), Merge::new("ab", "ab")]);
    assert_eq!(t.encode_word("abab"), ["abab"]);
    assert_eq!(t.language_code, "xx");
}

#[test]
fn single_occurrence_pairs_are_never_merged() {
    let t = train_bpe(&lexicon(&[("ab", 1)]), Mode::Ultimate, Weighting::Tf).unwrap();
    assert!(t.merges().is_empty());
    assert_eq!(t.alphabet(), ["a", "b"]);
}

#[test]
fn fixed_vocab_cap() {
    let t = train_bpe(
        &lexicon(&[("aa", 3), ("ab", 2)]),
        Mode::FixedVocab(3),
        Weighting::Tf,
    )
    .unwrap();
    assert_eq!(t.alphabet(), ["a", "b"]);
    assert_eq!(t.merges(), [Merge::new("a", "a")]);
    assert_eq!(t.vocab_size(), 3);
}

#[test]
fn types_weighting_ignores_tf() {
    // TF: (b,c) = 10 beats (a,b) = 2. Types: both 1... plus "abx" makes (a,b) = 2.
    let words = lexicon(&[("bc", 10), ("ab", 1), ("abx", 1)]);
    let tf = train_bpe(&words, Mode::FixedVocab(5), Weighting::Tf).unwrap();
    assert_eq!(tf.merges()[0], Merge::new("b", "c"));
    let types = train_bpe(&words, Mode::FixedVocab(5), Weighting::Types).unwrap();
    assert_eq!(types.merges()[0], Merge::new("a", "b"));
}

#[test]
fn ties_prefer_smaller_left_then_right() {
    let t = train_bpe(
        &lexicon(&[("zy", 2), ("ba", 2), ("bb", 2)]),
        Mode::FixedVocab(5),
        Weighting::Tf,
    )
    .unwrap();
    assert_eq!(t.merges(), [Merge::new("b", "a")]);
}

#[test]
fn alphabet_ordered_by_frequency() {
    let t = train_bpe(
        &lexicon(&[("cab", 1), ("c", 5), ("bb", 1)]),
        Mode::Ultimate,
        Weighting::Tf,
    )
    .unwrap();
    assert_eq!(t.alphabet(), ["c", "b", "a"]);
    assert_eq!(t.creation_rank("c"), Some(1));
}

#[test]
fn training_errors() {
    assert!(matches!(
        train_bpe(&lexicon(&[]), Mode::Ultimate, Weighting::Tf),
        Err(Error::EmptyLexicon)
    ));
    assert!(matches!(
        train_bpe(&lexicon(&[("abc", 2)]), Mode::FixedVocab(2), Weighting::Tf),
        Err(Error::TargetBelowAlphabet {
            target: 2,
            alphabet: 3
        })
    ));
    assert!(matches!(
        train_bpe(&lexicon(&[("a b", 2)]), Mode::Ultimate, Weighting::Tf),
        Err(Error::InvalidWord(_))
    ));
}

#[test]
fn duplicate_products_match_oracle() {
    // "ab" then "abc" via ab+c; "bcd" words later make b+c and a+bc frequent.
    let words = [("abc", 3), ("xbc", 4), ("abcq", 1), ("zabc", 1)];
    let lex = lexicon(&words);
    let owned: Vec<(String, u64)> = words.iter().map(|&(w, c)| (w.to_string(), c)).collect();
    for weighting in [Weighting::Tf, Weighting::Types] {
        let t = train_bpe(&lex, Mode::Ultimate, weighting).unwrap();
        let (alphabet, merges) = support::naive_train(&owned, Mode::Ultimate, weighting);
        assert_eq!(t.alphabet(), alphabet.as_slice());
        assert_eq!(merge_pairs(&t), merges);
    }
}

#[test]
fn merged_glottoset_trains() {
    use glottobpe::glottoset::{Frequency, Glottoset};
    let mk = |code: &str, rows: &[(&str, u64)]| {
        Glottoset::from_entries(
            code,
            rows.iter()
                .map(|&(w, tf)| (w.to_string(), Frequency { tf, df: 1 }))
                .collect(),
        )
    };
    let merged =
        glottobpe::merge_glottosets([&mk("a", &[("abab", 5)]), &mk("b", &[("abab", 5)])]).unwrap();
    let t = train_bpe(&merged, Mode::Ultimate, Weighting::Tf).unwrap();
    assert_eq!(t.language_code, "merged");
    assert_eq!(t.merges(), [Merge::new("a", "b"), Merge::new("ab", "ab")]);
}

fn max_pair_frequency(table: &MergeTable, words: &[(String, u64)], weighting: Weighting) -> i64 {
    let mut counts: HashMap<(String, String), i64> = HashMap::new();
    for (w, tf) in words {
        let weight = match weighting {
            Weighting::Tf => *tf as i64,
            Weighting::Types => 1,
        };
        for pair in table.encode_word(w).windows(2) {
            *counts
                .entry((pair[0].clone(), pair[1].clone()))
                .or_insert(0) += weight;
        }
    }
    counts.values().copied().max().unwrap_or(0)
}

fn small_lexicon() -> impl Strategy<Value = Vec<(String, u64)>> {
    proptest::collection::btree_map("[a-e]{1,8}", 1u64..6, 1..50)
        .prop_map(|m| m.into_iter().collect())
}

fn mode_strategy() -> impl Strategy<Value = Mode> {
    prop_oneof![
        Just(Mode::Ultimate),
        (5usize..40).prop_map(Mode::FixedVocab)
    ]
}

fn weighting_strategy() -> impl Strategy<Value = Weighting> {
    prop_oneof![Just(Weighting::Tf), Just(Weighting::Types)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trainer_matches_naive_oracle(words in small_lexicon(), mode in mode_strategy(), weighting in weighting_strategy()) {
        let t = train_bpe(&WordList::new("xx", words.clone()), mode, weighting).unwrap();
        let (alphabet, merges) = support::naive_train(&words, mode, weighting);
        prop_assert_eq!(t.alphabet(), alphabet.as_slice());
        prop_assert_eq!(merge_pairs(&t), merges);
    }

    #[test]
    fn ultimate_leaves_no_repeated_pair(words in small_lexicon(), weighting in weighting_strategy()) {
        let t = train_bpe(&WordList::new("xx", words.clone()), Mode::Ultimate, weighting).unwrap();
        prop_assert!(max_pair_frequency(&t, &words, weighting) <= 1);
    }

    #[test]
    fn encoding_matches_sequential_replay(words in small_lexicon(), probe in "[a-f]{1,12}") {
        let t = train_bpe(&WordList::new("xx", words), Mode::Ultimate, Weighting::Tf).unwrap();
        let pairs = merge_pairs(&t);
        let expected = support::naive_encode(t.alphabet(), &pairs, &probe);
        prop_assert_eq!(t.encode_word(&probe), expected);
    }

    #[test]
    fn fixed_vocab_is_prefix_of_larger(words in small_lexicon(), n in 5usize..30, extra in 0usize..30) {
        let lex = WordList::new("xx", words);
        let small = train_bpe(&lex, Mode::FixedVocab(n), Weighting::Tf);
        let large = train_bpe(&lex, Mode::FixedVocab(n + extra), Weighting::Tf);
        if let (Ok(small), Ok(large)) = (small, large) {
            prop_assert!(large.merges().starts_with(small.merges()));
        }
    }

    #[test]
    fn training_is_deterministic(words in small_lexicon()) {
        let mut shuffled = words.clone();
        shuffled.reverse();
        let a = train_bpe(&WordList::new("xx", words), Mode::Ultimate, Weighting::Tf).unwrap();
        let b = train_bpe(&WordList::new("xx", shuffled), Mode::Ultimate, Weighting::Tf).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn encoding_is_lossless_and_trees_agree(words in small_lexicon(), probe in "[a-gα]{1,16}") {
        let t = train_bpe(&WordList::new("xx", words), Mode::Ultimate, Weighting::Tf).unwrap();
        let tokens = t.encode_word(&probe);
        prop_assert_eq!(tokens.concat(), probe.clone());
        let forest = tokenization_tree(&t, &probe);
        let roots: Vec<_> = forest.iter().map(|n| n.token.clone()).collect();
        prop_assert_eq!(&roots, &tokens);
        let leaves: String = forest.iter().flat_map(|n| n.leaves()).collect();
        prop_assert_eq!(leaves, probe);
    }

    #[test]
    fn table_file_round_trips(words in small_lexicon(), mode in mode_strategy()) {
        if let Ok(t) = train_bpe(&WordList::new("xx", words), mode, Weighting::Types) {
            let back = MergeTable::read(t.to_text().as_bytes()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}

/// Minimal reader for the DOT subset the exporter emits.
type DotNodes = Vec<(u32, String, u32)>;

fn parse_dot(dot: &str) -> (DotNodes, Vec<(u32, u32)>) {
    let header = Regex::new(r#"^digraph "(?:[^"\\]|\\.)*" \{$"#).unwrap();
    let node = Regex::new(r#"^n(\d+) \[label="((?:[^"\\]|\\.)*) \((\d+)\)"\];$"#).unwrap();
    let edge = Regex::new(r"^n(\d+) -> n(\d+);$").unwrap();
    let mut lines = dot.lines().map(str::trim);
    assert!(header.is_match(lines.next().unwrap()));
    let (mut nodes, mut edges) = (Vec::new(), Vec::new());
    let mut closed = false;
    for line in lines {
        assert!(!closed, "content after closing brace");
        if line == "}" {
            closed = true;
        } else if line == "rankdir=LR;" {
        } else if let Some(c) = node.captures(line) {
            let label = c[2].replace("\\\"", "\"").replace("\\\\", "\\");
            nodes.push((c[1].parse().unwrap(), label, c[3].parse().unwrap()));
        } else if let Some(c) = edge.captures(line) {
            edges.push((c[1].parse().unwrap(), c[2].parse().unwrap()));
        } else {
            panic!("unexpected DOT line {line:?}");
        }
    }
    assert!(closed);
    (nodes, edges)
}

#[test]
fn dot_export_round_trips() {
    let words: Vec<(String, u64)> = ["banana", "bandana", "cabana", "ananas", "nab"]
        .iter()
        .map(|w| (w.to_string(), 3))
        .collect();
    let t = train_bpe(&WordList::new("xx", words), Mode::Ultimate, Weighting::Tf).unwrap();
    let g = merge_graph(&t, 5);
    let (nodes, edges) = parse_dot(&g.to_dot());
    let expected_nodes: Vec<_> = g
        .nodes
        .iter()
        .map(|n| (n.id, n.token.clone(), n.reuse_count))
        .collect();
    let expected_edges: Vec<_> = g.edges.iter().map(|e| (e.from, e.to)).collect();
    assert_eq!(nodes, expected_nodes);
    assert_eq!(edges, expected_edges);
    // acyclic: edges always point to a later-created, longer token
    for (from, to) in edges {
        assert!(
            from < to || t.tokens()[to as usize - 1].len() > t.tokens()[from as usize - 1].len()
        );
    }
    // reuse counts over the full list
    for n in &g.nodes {
        let refs = t
            .merges()
            .iter()
            .map(|m| (m.left == n.token) as u32 + (m.right == n.token) as u32)
            .sum::<u32>();
        assert_eq!(n.reuse_count, refs);
    }
}

#[test]
fn diff_trained_tables() {
    let a = train_bpe(
        &lexicon(&[("abab", 5), ("cd", 3)]),
        Mode::Ultimate,
        Weighting::Tf,
    )
    .unwrap();
    let b = train_bpe(
        &lexicon(&[("abab", 5), ("ef", 3)]),
        Mode::Ultimate,
        Weighting::Tf,
    )
    .unwrap();
    let d = diff_merge_tables(&a, &b);
    assert_eq!(d.shared, [Merge::new("a", "b"), Merge::new("ab", "ab")]);
    assert_eq!(d.unique_to_a, [Merge::new("c", "d")]);
    assert_eq!(d.unique_to_b, [Merge::new("e", "f")]);
    assert_eq!(d.common_prefix, 2);
}
