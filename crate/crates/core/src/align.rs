//! Monotonic character-phoneme alignment: digraph/phoneme-unit merging,
//! an EM-trained lexical translation table, and Viterbi decoding with
//! silent-letter skips.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Default number of EM iterations.
pub const DEFAULT_ITERATIONS: usize = 10;
/// Default add-k smoothing mass for unseen (grapheme, phoneme) pairs.
pub const DEFAULT_SMOOTHING_K: f64 = 0.01;
/// Default cost of skipping a unit (silent letter / spurious phoneme),
/// in -log space.
pub const DEFAULT_SKIP_COST: f64 = 3.0;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: malformed line: {message}")]
    Malformed { line: usize, message: String },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("training pair {pair} has an empty unit")]
    EmptyUnit { pair: usize },
    #[error("unit `{0}` cannot be aligned: unseen in training and no smoothing mass")]
    UnalignableUnit(String),
}

/// Multi-symbol units that should behave as one symbol during alignment.
#[derive(Debug, Clone, Default)]
pub struct MergeTable {
    grapheme_merges: Vec<String>,
    phoneme_merges: Vec<Vec<String>>,
}

impl MergeTable {
    pub fn new(
        grapheme_merges: Vec<String>,
        phoneme_merges: Vec<Vec<String>>,
    ) -> Result<Self, AlignError> {
        let table = MergeTable {
            grapheme_merges,
            phoneme_merges,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn grapheme_merges(&self) -> &[String] {
        &self.grapheme_merges
    }

    pub fn phoneme_merges(&self) -> &[Vec<String>] {
        &self.phoneme_merges
    }

    fn validate(&self) -> Result<(), AlignError> {
        for (i, unit) in self.grapheme_merges.iter().enumerate() {
            if unit.chars().count() < 2 {
                return Err(AlignError::Malformed {
                    line: 0,
                    message: format!("grapheme merge `{unit}` shorter than 2 symbols"),
                });
            }
            for later in &self.grapheme_merges[i + 1..] {
                if later.starts_with(unit.as_str()) && later.len() > unit.len() {
                    return Err(AlignError::Malformed {
                        line: 0,
                        message: format!("`{unit}` listed before longer unit `{later}`"),
                    });
                }
            }
        }
        for (i, unit) in self.phoneme_merges.iter().enumerate() {
            if unit.len() < 2 {
                return Err(AlignError::Malformed {
                    line: 0,
                    message: format!("phoneme merge `{}` shorter than 2 symbols", unit.join(" ")),
                });
            }
            for later in &self.phoneme_merges[i + 1..] {
                if later.len() > unit.len() && later[..unit.len()] == unit[..] {
                    return Err(AlignError::Malformed {
                        line: 0,
                        message: format!(
                            "`{}` listed before longer unit `{}`",
                            unit.join(" "),
                            later.join(" ")
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Loads a merge table file with `[graphemes]` and `[phonemes]` sections,
/// one unit per line (phoneme units are space-separated token sequences).
pub fn load_merge_table(path: impl AsRef<Path>) -> Result<MergeTable, AlignError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| AlignError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_merge_table(&text)
}

pub fn parse_merge_table(text: &str) -> Result<MergeTable, AlignError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Graphemes,
        Phonemes,
    }
    let mut section = Section::None;
    let mut grapheme_merges = Vec::new();
    let mut phoneme_merges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[graphemes]" => section = Section::Graphemes,
            "[phonemes]" => section = Section::Phonemes,
            unit => match section {
                Section::Graphemes => grapheme_merges.push(unit.to_string()),
                Section::Phonemes => {
                    phoneme_merges.push(unit.split_whitespace().map(str::to_string).collect())
                }
                Section::None => {
                    return Err(AlignError::Malformed {
                        line: lineno,
                        message: "unit before a `[graphemes]` or `[phonemes]` header".into(),
                    })
                }
            },
        }
    }
    MergeTable::new(grapheme_merges, phoneme_merges)
}

/// Greedy longest-match segmentation of a word and its phoneme sequence into
/// alignment units. Symbols outside any merge stay singletons.
pub fn merge_units(
    word: &str,
    phonemes: &[String],
    table: &MergeTable,
) -> (Vec<String>, Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut grapheme_units = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let mut matched: Option<(String, usize)> = None;
        for unit in &table.grapheme_merges {
            let len = unit.chars().count();
            if pos + len <= chars.len()
                && unit.chars().eq(chars[pos..pos + len].iter().copied())
                && matched.as_ref().is_none_or(|&(_, best)| len > best)
            {
                matched = Some((unit.clone(), len));
            }
        }
        match matched {
            Some((unit, len)) => {
                grapheme_units.push(unit);
                pos += len;
            }
            None => {
                grapheme_units.push(chars[pos].to_string());
                pos += 1;
            }
        }
    }

    let mut phoneme_units = Vec::new();
    let mut pos = 0;
    while pos < phonemes.len() {
        let mut matched: Option<(String, usize)> = None;
        for unit in &table.phoneme_merges {
            if pos + unit.len() <= phonemes.len()
                && phonemes[pos..pos + unit.len()] == unit[..]
                && matched.as_ref().is_none_or(|&(_, best)| unit.len() > best)
            {
                matched = Some((unit.concat(), unit.len()));
            }
        }
        match matched {
            Some((unit, len)) => {
                phoneme_units.push(unit);
                pos += len;
            }
            None => {
                phoneme_units.push(phonemes[pos].clone());
                pos += 1;
            }
        }
    }

    (grapheme_units, phoneme_units)
}

/// Lexical translation table trained with EM.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentModel {
    translation_probs: BTreeMap<(String, String), f64>,
    grapheme_vocab: BTreeSet<String>,
    phoneme_vocab: BTreeSet<String>,
    iterations_trained: usize,
    log_likelihoods: Vec<f64>,
}

impl AlignmentModel {
    pub fn iterations_trained(&self) -> usize {
        self.iterations_trained
    }

    /// Training-data log-likelihood after each iteration.
    pub fn log_likelihoods(&self) -> &[f64] {
        &self.log_likelihoods
    }

    pub fn prob(&self, grapheme: &str, phoneme: &str) -> f64 {
        self.translation_probs
            .get(&(grapheme.to_string(), phoneme.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    /// Probability smoothed with add-k mass over the phoneme vocabulary, so
    /// novel units from synthesized spellings stay alignable.
    fn smoothed_prob(&self, grapheme: &str, phoneme: &str, k: f64) -> f64 {
        let raw = self.prob(grapheme, phoneme);
        let v = self.phoneme_vocab.len().max(1) as f64;
        (raw + k) / (1.0 + k * v)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.translation_probs
            .iter()
            .map(|((g, p), prob)| (g.as_str(), p.as_str(), *prob))
    }

    /// One `grapheme<TAB>phoneme<TAB>probability` line per pair, sorted.
    /// The probability uses Rust's shortest round-trip float formatting, so
    /// serialize/deserialize is bit-exact.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# iterations\t{}\n", self.iterations_trained));
        for (i, ll) in self.log_likelihoods.iter().enumerate() {
            out.push_str(&format!("# log_likelihood\t{i}\t{ll}\n"));
        }
        for ((g, p), prob) in &self.translation_probs {
            out.push_str(&format!("{g}\t{p}\t{prob}\n"));
        }
        out
    }

    pub fn deserialize(text: &str) -> Result<Self, AlignError> {
        let mut translation_probs = BTreeMap::new();
        let mut grapheme_vocab = BTreeSet::new();
        let mut phoneme_vocab = BTreeSet::new();
        let mut iterations_trained = 0;
        let mut log_likelihoods = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if raw.is_empty() {
                continue;
            }
            if let Some(rest) = raw.strip_prefix("# iterations\t") {
                iterations_trained = rest.trim().parse().map_err(|_| AlignError::Malformed {
                    line: lineno,
                    message: format!("bad iteration count `{rest}`"),
                })?;
                continue;
            }
            if let Some(rest) = raw.strip_prefix("# log_likelihood\t") {
                let ll = rest
                    .split('\t')
                    .nth(1)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| AlignError::Malformed {
                        line: lineno,
                        message: format!("bad log-likelihood line `{raw}`"),
                    })?;
                log_likelihoods.push(ll);
                continue;
            }
            if raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(AlignError::Malformed {
                    line: lineno,
                    message: "expected `grapheme<TAB>phoneme<TAB>probability`".into(),
                });
            }
            let prob: f64 = fields[2].parse().map_err(|_| AlignError::Malformed {
                line: lineno,
                message: format!("bad probability `{}`", fields[2]),
            })?;
            grapheme_vocab.insert(fields[0].to_string());
            phoneme_vocab.insert(fields[1].to_string());
            translation_probs.insert((fields[0].to_string(), fields[1].to_string()), prob);
        }
        Ok(AlignmentModel {
            translation_probs,
            grapheme_vocab,
            phoneme_vocab,
            iterations_trained,
            log_likelihoods,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AlignError> {
        let path = path.as_ref();
        fs::write(path, self.serialize()).map_err(|source| AlignError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AlignError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| AlignError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::deserialize(&text)
    }
}

/// Trains the translation table with expectation-maximization: each phoneme
/// unit in a pair distributes its posterior over that pair's grapheme units,
/// then per-grapheme distributions are renormalized. Units are interned and
/// the tables kept dense, so training a few thousand words is instant.
pub fn train_aligner(
    pairs: &[(Vec<String>, Vec<String>)],
    iterations: usize,
) -> Result<AlignmentModel, AlignError> {
    if pairs.is_empty() {
        return Err(AlignError::EmptyTrainingSet);
    }
    let mut grapheme_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut phoneme_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (graphemes, phonemes)) in pairs.iter().enumerate() {
        if graphemes.iter().any(|u| u.is_empty()) || phonemes.iter().any(|u| u.is_empty()) {
            return Err(AlignError::EmptyUnit { pair: i });
        }
        for g in graphemes {
            let next = grapheme_ids.len();
            grapheme_ids.entry(g).or_insert(next);
        }
        for p in phonemes {
            let next = phoneme_ids.len();
            phoneme_ids.entry(p).or_insert(next);
        }
    }
    let id_pairs: Vec<(Vec<usize>, Vec<usize>)> = pairs
        .iter()
        .map(|(graphemes, phonemes)| {
            (
                graphemes.iter().map(|g| grapheme_ids[g.as_str()]).collect(),
                phonemes.iter().map(|p| phoneme_ids[p.as_str()]).collect(),
            )
        })
        .collect();

    let ng = grapheme_ids.len();
    let np = phoneme_ids.len();
    let uniform = 1.0 / np.max(1) as f64;
    let mut probs = vec![uniform; ng * np];
    let mut log_likelihoods = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        let mut counts = vec![0.0f64; ng * np];
        let mut totals = vec![0.0f64; ng];
        let mut ll = 0.0;

        for (graphemes, phonemes) in &id_pairs {
            for &p in phonemes {
                let mut denom = 0.0;
                for &g in graphemes {
                    denom += probs[g * np + p];
                }
                if denom <= 0.0 {
                    continue;
                }
                ll += (denom / graphemes.len() as f64).ln();
                for &g in graphemes {
                    let share = probs[g * np + p] / denom;
                    counts[g * np + p] += share;
                    totals[g] += share;
                }
            }
        }

        log_likelihoods.push(ll);
        for g in 0..ng {
            if totals[g] <= 0.0 {
                continue;
            }
            for p in 0..np {
                probs[g * np + p] = counts[g * np + p] / totals[g];
            }
        }
    }

    let mut translation_probs = BTreeMap::new();
    for (g, &gi) in &grapheme_ids {
        for (p, &pi) in &phoneme_ids {
            let prob = probs[gi * np + pi];
            if prob > 0.0 {
                translation_probs.insert((g.to_string(), p.to_string()), prob);
            }
        }
    }

    Ok(AlignmentModel {
        translation_probs,
        grapheme_vocab: grapheme_ids.keys().map(|s| s.to_string()).collect(),
        phoneme_vocab: phoneme_ids.keys().map(|s| s.to_string()).collect(),
        iterations_trained: iterations,
        log_likelihoods,
    })
}

/// Position of a grapheme unit inside its word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum UnitPosition {
    Initial,
    Medial,
    Final,
}

impl std::fmt::Display for UnitPosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitPosition::Initial => write!(f, "initial"),
            UnitPosition::Medial => write!(f, "medial"),
            UnitPosition::Final => write!(f, "final"),
        }
    }
}

/// A word with its grapheme units linked monotonically to its phoneme units.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedWord {
    pub word: String,
    pub grapheme_units: Vec<String>,
    pub phoneme_units: Vec<String>,
    /// Monotone (grapheme index, phoneme index) pairs. Graphemes may be
    /// absent (silent letters); the decoder links each phoneme at most once.
    pub links: Vec<(usize, usize)>,
    pub unit_positions: Vec<UnitPosition>,
}

impl AlignedWord {
    /// The phoneme unit the grapheme at `index` is linked to, if any.
    pub fn linked_phoneme(&self, index: usize) -> Option<&str> {
        self.links
            .iter()
            .find(|(g, _)| *g == index)
            .map(|(_, p)| self.phoneme_units[*p].as_str())
    }

    pub fn is_linked(&self, index: usize) -> bool {
        self.links.iter().any(|(g, _)| *g == index)
    }
}

fn unit_positions(n: usize) -> Vec<UnitPosition> {
    (0..n)
        .map(|i| {
            if i == 0 {
                UnitPosition::Initial
            } else if i == n - 1 {
                UnitPosition::Final
            } else {
                UnitPosition::Medial
            }
        })
        .collect()
}

/// Decoder knobs; see the module constants for defaults.
#[derive(Debug, Clone, Copy)]
pub struct AlignOptions {
    pub skip_cost: f64,
    pub smoothing_k: f64,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            skip_cost: DEFAULT_SKIP_COST,
            smoothing_k: DEFAULT_SMOOTHING_K,
        }
    }
}

/// Viterbi decode over a monotonic lattice with link, grapheme-skip and
/// phoneme-skip moves. Ties prefer link over grapheme-skip over
/// phoneme-skip, which also makes the leftmost viable link win.
pub fn align(
    word: &str,
    grapheme_units: &[String],
    phoneme_units: &[String],
    model: &AlignmentModel,
    options: AlignOptions,
) -> Result<AlignedWord, AlignError> {
    let n = grapheme_units.len();
    let m = phoneme_units.len();

    #[derive(Clone, Copy, PartialEq)]
    enum Move {
        Start,
        Link,
        SkipGrapheme,
        SkipPhoneme,
    }

    if options.smoothing_k <= 0.0 {
        for unit in grapheme_units {
            if !model.grapheme_vocab.contains(unit) {
                return Err(AlignError::UnalignableUnit(unit.clone()));
            }
        }
        for unit in phoneme_units {
            if !model.phoneme_vocab.contains(unit) {
                return Err(AlignError::UnalignableUnit(unit.clone()));
            }
        }
    }

    // A pair that is merely unseen gets an infinite link cost; the skip
    // moves route around it.
    let link_cost = |g: &str, p: &str| -> f64 {
        let prob = model.smoothed_prob(g, p, options.smoothing_k);
        if prob <= 0.0 {
            f64::INFINITY
        } else {
            -prob.ln()
        }
    };

    let mut cost = vec![f64::INFINITY; (n + 1) * (m + 1)];
    let mut back = vec![Move::Start; (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    cost[idx(0, 0)] = 0.0;

    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_move = Move::Start;
            // Order encodes tie-breaking: link first, then grapheme skip.
            if i > 0 && j > 0 {
                let c = cost[idx(i - 1, j - 1)]
                    + link_cost(&grapheme_units[i - 1], &phoneme_units[j - 1]);
                if c < best {
                    best = c;
                    best_move = Move::Link;
                }
            }
            if i > 0 {
                let c = cost[idx(i - 1, j)] + options.skip_cost;
                if c < best {
                    best = c;
                    best_move = Move::SkipGrapheme;
                }
            }
            if j > 0 {
                let c = cost[idx(i, j - 1)] + options.skip_cost;
                if c < best {
                    best = c;
                    best_move = Move::SkipPhoneme;
                }
            }
            cost[idx(i, j)] = best;
            back[idx(i, j)] = best_move;
        }
    }

    let mut links = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match back[idx(i, j)] {
            Move::Link => {
                links.push((i - 1, j - 1));
                i -= 1;
                j -= 1;
            }
            Move::SkipGrapheme => i -= 1,
            Move::SkipPhoneme => j -= 1,
            Move::Start => break,
        }
    }
    links.reverse();

    Ok(AlignedWord {
        word: word.to_string(),
        grapheme_units: grapheme_units.to_vec(),
        phoneme_units: phoneme_units.to_vec(),
        links,
        unit_positions: unit_positions(n),
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim_end(),
        None => line.trim_end(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;

    fn units(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn lexicon_pairs() -> Vec<(Vec<String>, Vec<String>)> {
        let inv = defaults::inventory();
        let lexicon = defaults::lexicon(&inv);
        let table = defaults::merge_table();
        let mut pairs: Vec<_> = lexicon
            .entries()
            .map(|(word, phonemes)| merge_units(word, phonemes, &table))
            .collect();
        pairs.sort();
        pairs
    }

    #[test]
    fn merges_digraphs_into_units() {
        let table = defaults::merge_table();
        let (g, p) = merge_units("thing", &units(&["θ", "ɪ", "ŋ"]), &table);
        assert_eq!(g, units(&["th", "i", "ng"]));
        assert_eq!(p, units(&["θ", "ɪ", "ŋ"]));
    }

    #[test]
    fn leaves_plain_words_alone() {
        let table = defaults::merge_table();
        let (g, p) = merge_units("cat", &units(&["k", "æ", "t"]), &table);
        assert_eq!(g, units(&["c", "a", "t"]));
        assert_eq!(p, units(&["k", "æ", "t"]));
    }

    #[test]
    fn merges_double_vowels_and_phoneme_sequences() {
        let table = defaults::merge_table();
        let (g, _) = merge_units("see", &units(&["s", "iː"]), &table);
        assert_eq!(g, units(&["s", "ee"]));

        let (g, p) = merge_units("teach", &units(&["t", "iː", "t", "ʃ"]), &table);
        assert_eq!(g, units(&["t", "ea", "ch"]));
        assert_eq!(p, units(&["t", "iː", "tʃ"]));
    }

    #[test]
    fn single_pair_training_is_certain() {
        let pairs = vec![(units(&["a"]), units(&["ɑ"]))];
        let model = train_aligner(&pairs, 10).unwrap();
        assert!((model.prob("a", "ɑ") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn em_prefers_cooccurring_pair() {
        // Hand-run: after one iteration prob(a->ɑ) is already 0.75 vs 0.25,
        // and the gap only widens.
        let pairs = vec![
            (units(&["a", "b"]), units(&["ɑ", "β"])),
            (units(&["a"]), units(&["ɑ"])),
        ];
        let model = train_aligner(&pairs, 10).unwrap();
        assert!(model.prob("a", "ɑ") > model.prob("a", "β"));
    }

    #[test]
    fn training_is_deterministic() {
        let pairs = lexicon_pairs();
        let a = train_aligner(&pairs, 10).unwrap();
        let b = train_aligner(&pairs, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert!(matches!(
            train_aligner(&[], 10),
            Err(AlignError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn empty_unit_in_training_pair_is_an_error() {
        let pairs = vec![(vec!["a".to_string(), String::new()], units(&["ɑ"]))];
        assert!(matches!(
            train_aligner(&pairs, 10),
            Err(AlignError::EmptyUnit { pair: 0 })
        ));
    }

    #[test]
    fn per_grapheme_distributions_normalize() {
        let pairs = lexicon_pairs();
        let model = train_aligner(&pairs, 10).unwrap();
        let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
        for (g, _, p) in model.entries() {
            *sums.entry(g).or_insert(0.0) += p;
        }
        for (g, sum) in sums {
            assert!((sum - 1.0).abs() < 1e-9, "{g} sums to {sum}");
        }
    }

    #[test]
    fn log_likelihood_non_decreasing() {
        let pairs = lexicon_pairs();
        let model = train_aligner(&pairs, 10).unwrap();
        let lls = model.log_likelihoods();
        assert_eq!(lls.len(), 10);
        for w in lls.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn aligns_thing_to_its_phonemes() {
        let pairs = lexicon_pairs();
        let model = train_aligner(&pairs, 10).unwrap();
        let table = defaults::merge_table();
        let (g, p) = merge_units("thing", &units(&["θ", "ɪ", "ŋ"]), &table);
        let aligned = align("thing", &g, &p, &model, AlignOptions::default()).unwrap();
        assert_eq!(aligned.links, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(aligned.linked_phoneme(0), Some("θ"));
        assert_eq!(aligned.linked_phoneme(1), Some("ɪ"));
        assert_eq!(aligned.linked_phoneme(2), Some("ŋ"));
    }

    #[test]
    fn silent_final_e_stays_unlinked() {
        let pairs = lexicon_pairs();
        let model = train_aligner(&pairs, 10).unwrap();
        let table = defaults::merge_table();
        let (g, p) = merge_units("come", &units(&["k", "ʌ", "m"]), &table);
        let aligned = align("come", &g, &p, &model, AlignOptions::default()).unwrap();
        let e_index = aligned.grapheme_units.len() - 1;
        assert_eq!(aligned.grapheme_units[e_index], "e");
        assert!(!aligned.is_linked(e_index), "links: {:?}", aligned.links);
        assert_eq!(aligned.linked_phoneme(0), Some("k"));
    }

    #[test]
    fn single_unit_word_is_forced_and_initial() {
        let pairs = vec![(units(&["a"]), units(&["ɑ"]))];
        let model = train_aligner(&pairs, 10).unwrap();
        let aligned = align(
            "a",
            &units(&["a"]),
            &units(&["ɑ"]),
            &model,
            AlignOptions::default(),
        )
        .unwrap();
        assert_eq!(aligned.links, vec![(0, 0)]);
        assert_eq!(aligned.unit_positions, vec![UnitPosition::Initial]);
    }

    #[test]
    fn unseen_unit_without_smoothing_is_unalignable() {
        let pairs = vec![(units(&["a"]), units(&["ɑ"]))];
        let model = train_aligner(&pairs, 10).unwrap();
        let options = AlignOptions {
            smoothing_k: 0.0,
            ..AlignOptions::default()
        };
        let err = align("q", &units(&["q"]), &units(&["ɑ"]), &model, options).unwrap_err();
        assert!(matches!(err, AlignError::UnalignableUnit(ref u) if u == "q"));
    }

    #[test]
    fn alignment_is_monotone_and_covers_phonemes_across_lexicon() {
        let inv = defaults::inventory();
        let lexicon = defaults::lexicon(&inv);
        let table = defaults::merge_table();
        let pairs = lexicon_pairs();
        let model = train_aligner(&pairs, 10).unwrap();

        for (word, phonemes) in lexicon.entries() {
            let (g, p) = merge_units(word, phonemes, &table);
            let aligned = align(word, &g, &p, &model, AlignOptions::default()).unwrap();
            for w in aligned.links.windows(2) {
                assert!(
                    w[0].0 <= w[1].0 && w[0].1 <= w[1].1,
                    "{word}: {:?}",
                    aligned.links
                );
            }
            // Every phoneme unit linked exactly once.
            for j in 0..aligned.phoneme_units.len() {
                let count = aligned.links.iter().filter(|(_, pj)| *pj == j).count();
                assert_eq!(count, 1, "{word}: phoneme {j} linked {count} times");
            }
            // Grapheme units concatenate back to the word.
            assert_eq!(aligned.grapheme_units.concat(), word.to_lowercase());
        }
    }

    #[test]
    fn model_serialization_round_trips_bit_exactly() {
        let pairs = lexicon_pairs();
        let model = train_aligner(&pairs, 10).unwrap();
        let text = model.serialize();
        let back = AlignmentModel::deserialize(&text).unwrap();
        assert_eq!(model, back);
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn merge_table_rejects_prefix_before_longer_unit() {
        let err = parse_merge_table("[graphemes]\nig\night\n");
        assert!(err.is_err());
    }
}
