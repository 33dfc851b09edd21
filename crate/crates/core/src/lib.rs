//! Subword-based comparative linguistics.
//!
//! Builds per-language lexicons (glottosets) from plain-text corpora, trains
//! word-level BPE tokenizers on them and compares languages through their
//! tokenizers: vocabulary distances, Mantel correlation with a phylogeny,
//! homograph segmentation, morpheme-boundary agreement and subword language
//! identification.

pub mod bpe;
pub mod cli;
pub mod comparative;
pub mod corpus;
pub mod crosslingual;
pub mod error;
pub mod glottoset;

pub use bpe::{
    diff_merge_tables, merge_graph, tokenization_tree, train_bpe, Lexicon, Merge, MergeTable, Mode,
    TokenTree, Weighting, WordList,
};
pub use corpus::{
    classify_script, contamination_report, extract_words, filter_paragraphs, Paragraph, Script,
};
pub use error::{Error, Result};
pub use glottoset::{build_glottoset, lexical_stats, merge_glottosets, Glottoset, MergedGlottoset};
