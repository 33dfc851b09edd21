//! Cross-language statistics over trained tokenizers.
//!
//! - vocabulary distance (1 - Jaccard) and distance matrices
//! - phylogenetic distance from a three-level classification
//! - Mantel permutation test between two distance matrices
//! - within/between family separation
//! - homograph segmentation divergence
//! - morpheme-boundary precision/recall against gold segmentations

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::hash::Hash;
use std::io::{BufRead, Write};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bpe::MergeTable;
use crate::error::{Error, Result};
use crate::glottoset::{io_or_malformed, Glottoset};

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    /// Checks squareness, unique labels, zero diagonal, non-negativity and
    /// symmetry (within 1e-12).
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        let unique: HashSet<&String> = labels.iter().collect();
        if unique.len() != n {
            return Err(Error::InvalidMatrix("duplicate labels".into()));
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMatrix(format!("expected a {n}x{n} matrix")));
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "non-zero diagonal at {:?}",
                    labels[i]
                )));
            }
            for (j, &v) in values[i].iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "bad distance {v} at ({i}, {j})"
                    )));
                }
                if (v - values[j][i]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Reorders rows and columns jointly: entry (i, j) of the result is
    /// entry (perm[i], perm[j]) of `self`, labels included.
    pub fn permuted(&self, perm: &[usize]) -> DistanceMatrix {
        DistanceMatrix {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            values: perm
                .iter()
                .map(|&pi| perm.iter().map(|&pj| self.values[pi][pj]).collect())
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> DistanceMatrix {
        DistanceMatrix {
            labels: self.labels.clone(),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, ",{}", self.labels.join(","))?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            write!(writer, "{label}")?;
            for v in row {
                write!(writer, ",{v}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut labels: Option<Vec<String>> = None;
        let mut values = Vec::new();
        let mut last = 0;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            last = lineno;
            let line = line.map_err(|e| io_or_malformed(e, lineno))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            match &labels {
                None => {
                    if !fields[0].is_empty() {
                        return Err(Error::malformed(
                            lineno,
                            "header must start with an empty cell",
                        ));
                    }
                    labels = Some(fields[1..].iter().map(|s| s.to_string()).collect());
                }
                Some(header) => {
                    let row_idx = values.len();
                    if fields.len() != header.len() + 1 {
                        return Err(Error::malformed(lineno, "wrong number of columns"));
                    }
                    if header.get(row_idx).map(String::as_str) != Some(fields[0]) {
                        return Err(Error::malformed(
                            lineno,
                            "row label does not match the header",
                        ));
                    }
                    let row = fields[1..]
                        .iter()
                        .map(|f| {
                            f.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::malformed(lineno, format!("bad number {f:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    values.push(row);
                }
            }
        }
        let labels = labels.ok_or_else(|| Error::malformed(1, "missing header"))?;
        DistanceMatrix::new(labels, values).map_err(|e| Error::malformed(last, e.to_string()))
    }
}

/// 1 - |A ∩ B| / |A ∪ B|.
pub fn jaccard_distance<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("vocabulary"));
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let shared = small.iter().filter(|t| large.contains(t)).count();
    let union = a.len() + b.len() - shared;
    Ok(1.0 - shared as f64 / union as f64)
}

/// Full token set (alphabet and merge products) of a table.
pub fn vocabulary(table: &MergeTable) -> HashSet<String> {
    table.tokens().iter().cloned().collect()
}

/// Pairwise Jaccard distances, labels in input order.
pub fn build_distance_matrix(vocabs: &[(&str, HashSet<String>)]) -> Result<DistanceMatrix> {
    if vocabs.len() < 2 {
        return Err(Error::TooFewInputs {
            needed: 2,
            got: vocabs.len(),
        });
    }
    let n = vocabs.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = jaccard_distance(&vocabs[i].1, &vocabs[j].1)?;
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    let labels: Vec<String> = vocabs.iter().map(|(c, _)| c.to_string()).collect();
    DistanceMatrix::new(labels.clone(), values).map_err(|e| match e {
        Error::InvalidMatrix(_) => Error::DuplicateLanguage(first_duplicate(&labels)),
        other => other,
    })
}

fn first_duplicate(labels: &[String]) -> String {
    let mut seen = HashSet::new();
    labels
        .iter()
        .find(|l| !seen.insert(l.as_str()))
        .cloned()
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineage {
    pub family: String,
    pub subfamily: String,
    pub branch: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Family,
    Subfamily,
    Branch,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "family" => Ok(Level::Family),
            "subfamily" => Ok(Level::Subfamily),
            "branch" => Ok(Level::Branch),
            _ => Err(Error::InvalidParameter(format!("unknown level {s:?}"))),
        }
    }
}

/// Language code -> family / subfamily / branch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhyloClassification {
    pub lineages: BTreeMap<String, Lineage>,
}

impl PhyloClassification {
    pub fn insert(
        &mut self,
        code: &str,
        family: &str,
        subfamily: &str,
        branch: &str,
    ) -> Result<()> {
        if [family, subfamily, branch]
            .iter()
            .any(|s| s.trim().is_empty())
        {
            return Err(Error::InvalidParameter(format!(
                "empty classification level for {code:?}"
            )));
        }
        let lineage = Lineage {
            family: family.to_string(),
            subfamily: subfamily.to_string(),
            branch: branch.to_string(),
        };
        if self.lineages.insert(code.to_string(), lineage).is_some() {
            return Err(Error::DuplicateLanguage(code.to_string()));
        }
        Ok(())
    }

    pub fn get(&self, code: &str) -> Result<&Lineage> {
        self.lineages
            .get(code)
            .ok_or_else(|| Error::Unclassified(code.to_string()))
    }

    /// Group name of every classified language at one level.
    pub fn groups(&self, level: Level) -> BTreeMap<String, String> {
        self.lineages
            .iter()
            .map(|(code, l)| {
                let group = match level {
                    Level::Family => l.family.clone(),
                    Level::Subfamily => format!("{}/{}", l.family, l.subfamily),
                    Level::Branch => format!("{}/{}/{}", l.family, l.subfamily, l.branch),
                };
                (code.clone(), group)
            })
            .collect()
    }

    /// `code<TAB>family<TAB>subfamily<TAB>branch`, optional `code...` header.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut out = PhyloClassification::default();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| io_or_malformed(e, lineno))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || (lineno == 1 && line.starts_with("code\t")) {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 || f[0].is_empty() {
                return Err(Error::malformed(
                    lineno,
                    "expected code, family, subfamily, branch",
                ));
            }
            out.insert(f[0], f[1], f[2], f[3])
                .map_err(|e| Error::malformed(lineno, e.to_string()))?;
        }
        Ok(out)
    }
}

/// 0 same branch, 1 same subfamily, 2 same family, 3 different families.
pub fn phylo_distance(a: &Lineage, b: &Lineage) -> f64 {
    if a.family != b.family {
        3.0
    } else if a.subfamily != b.subfamily {
        2.0
    } else if a.branch != b.branch {
        1.0
    } else {
        0.0
    }
}

pub fn phylo_distance_matrix(
    classification: &PhyloClassification,
    codes: &[&str],
) -> Result<DistanceMatrix> {
    let lineages = codes
        .iter()
        .map(|c| classification.get(c))
        .collect::<Result<Vec<_>>>()?;
    let n = codes.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i][j] = phylo_distance(lineages[i], lineages[j]);
            }
        }
    }
    DistanceMatrix::new(codes.iter().map(|c| c.to_string()).collect(), values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MantelResult {
    pub r: f64,
    pub p: f64,
    pub permutations: usize,
    pub seed: u64,
}

/// Upper-triangle correlation under a relabelling of the second matrix.
struct MantelKernel<'a> {
    pairs: Vec<(usize, usize)>,
    a_centered: Vec<f64>,
    b: &'a DistanceMatrix,
    b_mean: f64,
    denom: f64,
}

impl<'a> MantelKernel<'a> {
    fn new(a: &DistanceMatrix, b: &'a DistanceMatrix) -> Result<Self> {
        let n = a.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let m = pairs.len() as f64;
        let a_vals: Vec<f64> = pairs.iter().map(|&(i, j)| a.get(i, j)).collect();
        let b_vals: Vec<f64> = pairs.iter().map(|&(i, j)| b.get(i, j)).collect();
        let a_mean = a_vals.iter().sum::<f64>() / m;
        let b_mean = b_vals.iter().sum::<f64>() / m;
        let a_centered: Vec<f64> = a_vals.iter().map(|v| v - a_mean).collect();
        let saa: f64 = a_centered.iter().map(|v| v * v).sum();
        let sbb: f64 = b_vals.iter().map(|v| (v - b_mean) * (v - b_mean)).sum();
        if saa == 0.0 || sbb == 0.0 {
            return Err(Error::ZeroVariance);
        }
        Ok(MantelKernel {
            pairs,
            a_centered,
            b,
            b_mean,
            denom: (saa * sbb).sqrt(),
        })
    }

    // The multiset of b's upper-triangle values is invariant under a joint
    // row/column permutation, so its mean and variance are reused.
    fn r(&self, perm: &[usize]) -> f64 {
        let sab: f64 = self
            .pairs
            .iter()
            .zip(&self.a_centered)
            .map(|(&(i, j), ac)| ac * (self.b.get(perm[i], perm[j]) - self.b_mean))
            .sum();
        (sab / self.denom).clamp(-1.0, 1.0)
    }
}

/// One-sided Mantel test. Permutation k is a fresh identity permutation
/// shuffled by a ChaCha8 stream seeded with `seed`; the p-value counts
/// permuted correlations at least as large as the observed one, with +1
/// smoothing.
pub fn mantel_test(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    permutations: usize,
    seed: u64,
) -> Result<MantelResult> {
    if a.labels != b.labels {
        return Err(Error::LabelMismatch);
    }
    if a.len() < 3 {
        return Err(Error::TooFewInputs {
            needed: 3,
            got: a.len(),
        });
    }
    let kernel = MantelKernel::new(a, b)?;
    let n = a.len();
    let identity: Vec<usize> = (0..n).collect();
    let r = kernel.r(&identity);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = identity.clone();
    let mut hits = 0usize;
    for _ in 0..permutations {
        perm.copy_from_slice(&identity);
        perm.shuffle(&mut rng);
        if kernel.r(&perm) >= r {
            hits += 1;
        }
    }
    Ok(MantelResult {
        r,
        p: (1 + hits) as f64 / (1 + permutations) as f64,
        permutations,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub within_mean: f64,
    pub between_mean: f64,
    /// between / within.
    pub ratio: f64,
    /// Mean internal distance of every group with at least two members.
    pub per_family: BTreeMap<String, f64>,
}

pub fn family_separation(
    d: &DistanceMatrix,
    families: &BTreeMap<String, String>,
) -> Result<Separation> {
    let groups: Vec<&String> = d
        .labels
        .iter()
        .map(|l| {
            families
                .get(l)
                .ok_or_else(|| Error::Unclassified(l.clone()))
        })
        .collect::<Result<_>>()?;
    let (mut within_sum, mut within_n) = (0.0, 0usize);
    let (mut between_sum, mut between_n) = (0.0, 0usize);
    let mut per: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            let v = d.get(i, j);
            if groups[i] == groups[j] {
                within_sum += v;
                within_n += 1;
                let e = per.entry(groups[i].clone()).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            } else {
                between_sum += v;
                between_n += 1;
            }
        }
    }
    if within_n == 0 {
        return Err(Error::NoWithinPairs);
    }
    if between_n == 0 {
        return Err(Error::NoBetweenPairs);
    }
    let within_mean = within_sum / within_n as f64;
    let between_mean = between_sum / between_n as f64;
    Ok(Separation {
        within_mean,
        between_mean,
        ratio: between_mean / within_mean,
        per_family: per
            .into_iter()
            .map(|(k, (s, c))| (k, s / c as f64))
            .collect(),
    })
}

/// Word -> languages in which it reaches the frequency threshold.
pub type Homographs = BTreeMap<String, BTreeSet<String>>;

/// Words with tf >= `min_tf` in at least two languages.
pub fn find_homographs(glottosets: &[&Glottoset], min_tf: u64) -> Result<Homographs> {
    if glottosets.len() < 2 {
        return Err(Error::TooFewInputs {
            needed: 2,
            got: glottosets.len(),
        });
    }
    let mut codes = HashSet::new();
    let mut owners: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for g in glottosets {
        if !codes.insert(g.language_code.as_str()) {
            return Err(Error::DuplicateLanguage(g.language_code.clone()));
        }
        for (word, f) in &g.entries {
            if f.tf >= min_tf {
                owners
                    .entry(word.clone())
                    .or_default()
                    .insert(g.language_code.clone());
            }
        }
    }
    owners.retain(|_, langs| langs.len() >= 2);
    Ok(owners)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCount {
    pub shared: usize,
    pub different: usize,
}

impl PairCount {
    pub fn fraction_different(&self) -> f64 {
        if self.shared == 0 {
            0.0
        } else {
            self.different as f64 / self.shared as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomographReport {
    /// Word -> language -> tokens, for every possessing language.
    pub segmentations: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub different: usize,
    pub fraction_different: f64,
    /// Keyed by (smaller code, larger code).
    pub pairs: BTreeMap<(String, String), PairCount>,
}

impl HomographReport {
    pub fn total(&self) -> usize {
        self.segmentations.len()
    }

    pub fn fraction_identical(&self) -> f64 {
        1.0 - self.fraction_different
    }

    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(
            writer,
            "lang_a\tlang_b\tshared\tdifferent\tfraction_different"
        )?;
        writeln!(
            writer,
            "*\t*\t{}\t{}\t{:.6}",
            self.total(),
            self.different,
            self.fraction_different
        )?;
        for ((a, b), c) in &self.pairs {
            writeln!(
                writer,
                "{a}\t{b}\t{}\t{}\t{:.6}",
                c.shared,
                c.different,
                c.fraction_different()
            )?;
        }
        Ok(())
    }

    /// `word<TAB>lang<TAB>segmentation` rows, tokens joined by `|`.
    pub fn write_segmentations<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "word\tlanguage\tsegmentation")?;
        for (word, per_lang) in &self.segmentations {
            for (lang, tokens) in per_lang {
                writeln!(writer, "{word}\t{lang}\t{}", tokens.join("|"))?;
            }
        }
        Ok(())
    }
}

/// A homograph is "different" when any two of its languages segment it
/// into unequal token sequences.
pub fn homograph_report(
    homographs: &Homographs,
    tokenizers: &BTreeMap<String, &MergeTable>,
) -> Result<HomographReport> {
    if homographs.is_empty() {
        return Err(Error::EmptyInput("homograph set"));
    }
    let mut segmentations = BTreeMap::new();
    let mut pairs: BTreeMap<(String, String), PairCount> = BTreeMap::new();
    let mut different = 0;
    for (word, langs) in homographs {
        let mut per_lang = BTreeMap::new();
        for lang in langs {
            let table = tokenizers.get(lang).ok_or_else(|| {
                Error::InvalidParameter(format!("no tokenizer for language {lang:?}"))
            })?;
            per_lang.insert(lang.clone(), table.encode_word(word));
        }
        let segs: Vec<(&String, &Vec<String>)> = per_lang.iter().collect();
        let mut any_diff = false;
        for i in 0..segs.len() {
            for j in (i + 1)..segs.len() {
                let differs = segs[i].1 != segs[j].1;
                any_diff |= differs;
                let c = pairs
                    .entry((segs[i].0.clone(), segs[j].0.clone()))
                    .or_default();
                c.shared += 1;
                c.different += differs as usize;
            }
        }
        different += any_diff as usize;
        segmentations.insert(word.clone(), per_lang);
    }
    Ok(HomographReport {
        fraction_different: different as f64 / segmentations.len() as f64,
        different,
        segmentations,
        pairs,
    })
}

/// Word -> interior boundary positions (character offsets 1..len-1).
pub type GoldSegmentations = BTreeMap<String, BTreeSet<usize>>;

/// Reads `word<TAB>seg` rows where `seg` separates morphs with `|`.
pub fn read_gold_tsv<R: BufRead>(reader: R) -> Result<GoldSegmentations> {
    let mut gold = GoldSegmentations::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| io_or_malformed(e, lineno))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || (lineno == 1 && line == "word\tseg") {
            continue;
        }
        let (word, seg) = line
            .split_once('\t')
            .ok_or_else(|| Error::malformed(lineno, "expected word<TAB>segmentation"))?;
        let morphs: Vec<&str> = seg.split('|').collect();
        if morphs.iter().any(|m| m.is_empty()) || morphs.concat() != word {
            return Err(Error::malformed(
                lineno,
                format!("segmentation {seg:?} does not spell {word:?}"),
            ));
        }
        let mut pos = 0;
        let mut bounds = BTreeSet::new();
        for m in &morphs[..morphs.len() - 1] {
            pos += m.chars().count();
            bounds.insert(pos);
        }
        if gold.insert(word.to_string(), bounds).is_some() {
            return Err(Error::malformed(lineno, format!("duplicate word {word:?}")));
        }
    }
    Ok(gold)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Micro-averaged scores from pooled counts; empty denominators give 0.
    pub fn from_counts(matched: usize, predicted: usize, gold: usize) -> Self {
        let precision = if predicted == 0 {
            0.0
        } else {
            matched as f64 / predicted as f64
        };
        let recall = if gold == 0 {
            0.0
        } else {
            matched as f64 / gold as f64
        };
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEvalResult {
    pub words: usize,
    pub bpe: Prf,
    /// Averaged over baseline trials.
    pub random: Prf,
    pub predicted_boundaries: usize,
    pub gold_boundaries: usize,
}

impl BoundaryEvalResult {
    /// Relative F1 improvement over the random baseline, in percent.
    pub fn improvement_percent(&self) -> f64 {
        if self.random.f1 == 0.0 {
            f64::NAN
        } else {
            (self.bpe.f1 / self.random.f1 - 1.0) * 100.0
        }
    }
}

/// Boundaries after each token except the last, as character offsets.
pub fn token_boundaries(tokens: &[String]) -> BTreeSet<usize> {
    let mut pos = 0;
    let mut out = BTreeSet::new();
    for t in &tokens[..tokens.len().saturating_sub(1)] {
        pos += t.chars().count();
        out.insert(pos);
    }
    out
}

/// Compares BPE boundaries with gold boundaries, micro-averaged over words.
/// The random baseline places, per word, as many boundaries as BPE did,
/// uniformly without replacement among interior positions.
pub fn boundary_eval(
    gold: &GoldSegmentations,
    table: &MergeTable,
    baseline_trials: usize,
    seed: u64,
) -> Result<BoundaryEvalResult> {
    if gold.is_empty() {
        return Err(Error::EmptyInput("gold segmentation set"));
    }
    if baseline_trials == 0 {
        return Err(Error::InvalidParameter(
            "baseline trials must be at least 1".into(),
        ));
    }
    struct Item<'a> {
        len: usize,
        gold: &'a BTreeSet<usize>,
        predicted: usize,
    }
    let mut items = Vec::with_capacity(gold.len());
    let (mut matched, mut predicted, mut gold_total) = (0, 0, 0);
    for (word, bounds) in gold {
        let len = word.chars().count();
        if let Some(&bad) = bounds.iter().find(|&&b| b == 0 || b >= len) {
            return Err(Error::MalformedGold {
                word: word.clone(),
                message: format!("boundary {bad} is not interior to a word of length {len}"),
            });
        }
        let bpe = token_boundaries(&table.encode_word(word));
        matched += bpe.intersection(bounds).count();
        predicted += bpe.len();
        gold_total += bounds.len();
        items.push(Item {
            len,
            gold: bounds,
            predicted: bpe.len(),
        });
    }
    let bpe = Prf::from_counts(matched, predicted, gold_total);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = Prf::default();
    for _ in 0..baseline_trials {
        let mut hit = 0;
        for item in &items {
            if item.predicted == 0 {
                continue;
            }
            for p in index::sample(&mut rng, item.len - 1, item.predicted) {
                if item.gold.contains(&(p + 1)) {
                    hit += 1;
                }
            }
        }
        let trial = Prf::from_counts(hit, predicted, gold_total);
        random.precision += trial.precision;
        random.recall += trial.recall;
        random.f1 += trial.f1;
    }
    let t = baseline_trials as f64;
    random.precision /= t;
    random.recall /= t;
    random.f1 /= t;

    Ok(BoundaryEvalResult {
        words: items.len(),
        bpe,
        random,
        predicted_boundaries: predicted,
        gold_boundaries: gold_total,
    })
}

pub fn write_boundary_tsv<'a, W: Write>(
    mut writer: W,
    rows: impl IntoIterator<Item = (&'a str, &'a BoundaryEvalResult)>,
) -> Result<()> {
    writeln!(
        writer,
        "language\twords\tbpe_precision\tbpe_recall\tbpe_f1\trandom_precision\trandom_recall\trandom_f1\timprovement_percent"
    )?;
    for (lang, r) in rows {
        writeln!(
            writer,
            "{lang}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.1}",
            r.words,
            r.bpe.precision,
            r.bpe.recall,
            r.bpe.f1,
            r.random.precision,
            r.random.recall,
            r.random.f1,
            r.improvement_percent()
        )?;
    }
    Ok(())
}

pub fn write_separation_tsv<W: Write>(mut writer: W, s: &Separation) -> Result<()> {
    writeln!(writer, "metric\tvalue")?;
    writeln!(writer, "within_mean\t{:.6}", s.within_mean)?;
    writeln!(writer, "between_mean\t{:.6}", s.between_mean)?;
    writeln!(writer, "ratio\t{:.6}", s.ratio)?;
    for (family, mean) in &s.per_family {
        writeln!(writer, "family_mean:{family}\t{mean:.6}")?;
    }
    Ok(())
}
