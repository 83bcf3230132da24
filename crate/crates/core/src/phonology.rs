//! Phoneme inventory, articulatory feature vectors, and the pairwise
//! substitution-weight matrix consumed by the phonological distance metric.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Feature names every consonant must define.
pub const CONSONANT_FEATURES: [&str; 3] = ["voicing", "place", "manner"];
/// Feature names every vowel must define.
pub const VOWEL_FEATURES: [&str; 4] = ["height", "backness", "roundness", "length"];

/// Default insertion/deletion cost used when building a weight matrix.
pub const DEFAULT_INDEL_COST: f64 = 0.6;

#[derive(Debug, Error)]
pub enum PhonologyError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: duplicate symbol `{symbol}`")]
    DuplicateSymbol { symbol: String, line: usize },
    #[error("line {line}: unknown feature `{feature}` for {kind} `{symbol}`")]
    UnknownFeature {
        symbol: String,
        kind: PhonemeKind,
        feature: String,
        line: usize,
    },
    #[error("line {line}: {kind} `{symbol}` is missing feature `{feature}`")]
    MissingFeature {
        symbol: String,
        kind: PhonemeKind,
        feature: String,
        line: usize,
    },
    #[error("line {line}: malformed line: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: override weight {weight} outside [0, 1]")]
    OverrideOutOfRange { weight: f64, line: usize },
    #[error("line {line}: override references unknown symbol `{symbol}`")]
    OverrideUnknownSymbol { symbol: String, line: usize },
    #[error("phoneme `{0}` is not in the inventory")]
    UnknownSymbol(String),
    #[error("indel cost {0} outside (0, 1]")]
    InvalidIndelCost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PhonemeKind {
    Consonant,
    Vowel,
}

impl fmt::Display for PhonemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhonemeKind::Consonant => write!(f, "consonant"),
            PhonemeKind::Vowel => write!(f, "vowel"),
        }
    }
}

impl PhonemeKind {
    fn required_features(self) -> &'static [&'static str] {
        match self {
            PhonemeKind::Consonant => &CONSONANT_FEATURES,
            PhonemeKind::Vowel => &VOWEL_FEATURES,
        }
    }
}

/// A single phoneme: a symbol plus its articulatory feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct Phoneme {
    pub symbol: String,
    pub kind: PhonemeKind,
    pub features: BTreeMap<String, String>,
}

/// The set of phonemes the rest of the pipeline may talk about, together
/// with per-feature importance weights and sparse pairwise overrides.
#[derive(Debug, Clone)]
pub struct PhonemeInventory {
    phonemes: Vec<Phoneme>,
    index: BTreeMap<String, usize>,
    feature_weights: BTreeMap<String, f64>,
    overrides: BTreeMap<(String, String), f64>,
}

impl PhonemeInventory {
    pub fn phonemes(&self) -> &[Phoneme] {
        &self.phonemes
    }

    pub fn get(&self, symbol: &str) -> Option<&Phoneme> {
        self.index.get(symbol).map(|&i| &self.phonemes[i])
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn feature_weights(&self) -> &BTreeMap<String, f64> {
        &self.feature_weights
    }

    /// Override lookup is symmetric: (a, b) and (b, a) retrieve the same value.
    pub fn override_for(&self, a: &str, b: &str) -> Option<f64> {
        self.overrides.get(&key(a, b)).copied()
    }

    /// Register a pairwise substitution weight that takes precedence over the
    /// feature-based distance. Both symbols must already be in the inventory.
    pub fn set_override(&mut self, a: &str, b: &str, weight: f64) -> Result<(), PhonologyError> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(PhonologyError::OverrideOutOfRange { weight, line: 0 });
        }
        for s in [a, b] {
            if !self.contains(s) {
                return Err(PhonologyError::UnknownSymbol(s.to_string()));
            }
        }
        self.overrides.insert(key(a, b), weight);
        Ok(())
    }

    pub fn set_feature_weight(&mut self, feature: &str, weight: f64) {
        self.feature_weights
            .insert(feature.to_string(), weight.max(0.0));
    }
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Loads an inventory file: one phoneme per line
/// (`symbol<TAB>kind<TAB>feature=value,...`), `!override` lines for sparse
/// pairwise weights, `#` comments.
pub fn load_inventory(path: impl AsRef<Path>) -> Result<PhonemeInventory, PhonologyError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PhonologyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_inventory(&text)
}

/// Parses inventory text; see [`load_inventory`] for the format.
pub fn parse_inventory(text: &str) -> Result<PhonemeInventory, PhonologyError> {
    let mut phonemes: Vec<Phoneme> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut pending_overrides: Vec<(String, String, f64, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] == "!override" {
            if fields.len() != 4 {
                return Err(PhonologyError::Malformed {
                    line: lineno,
                    message: "override lines need `!override<TAB>a<TAB>b<TAB>weight`".into(),
                });
            }
            let weight: f64 = fields[3]
                .trim()
                .parse()
                .map_err(|_| PhonologyError::Malformed {
                    line: lineno,
                    message: format!("unparseable override weight `{}`", fields[3]),
                })?;
            if !(0.0..=1.0).contains(&weight) {
                return Err(PhonologyError::OverrideOutOfRange {
                    weight,
                    line: lineno,
                });
            }
            pending_overrides.push((fields[1].to_string(), fields[2].to_string(), weight, lineno));
            continue;
        }

        if fields.len() != 3 {
            return Err(PhonologyError::Malformed {
                line: lineno,
                message: "phoneme lines need `symbol<TAB>kind<TAB>feature=value,...`".into(),
            });
        }
        let symbol = fields[0].trim();
        if symbol.is_empty() {
            return Err(PhonologyError::Malformed {
                line: lineno,
                message: "empty symbol".into(),
            });
        }
        let kind = match fields[1].trim() {
            "consonant" => PhonemeKind::Consonant,
            "vowel" => PhonemeKind::Vowel,
            other => {
                return Err(PhonologyError::Malformed {
                    line: lineno,
                    message: format!("unknown kind `{other}` (expected consonant|vowel)"),
                })
            }
        };
        if index.contains_key(symbol) {
            return Err(PhonologyError::DuplicateSymbol {
                symbol: symbol.to_string(),
                line: lineno,
            });
        }

        let mut features = BTreeMap::new();
        for pair in fields[2].split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| PhonologyError::Malformed {
                    line: lineno,
                    message: format!("feature `{pair}` is not `name=value`"),
                })?;
            let name = name.trim();
            if !kind.required_features().contains(&name) {
                return Err(PhonologyError::UnknownFeature {
                    symbol: symbol.to_string(),
                    kind,
                    feature: name.to_string(),
                    line: lineno,
                });
            }
            features.insert(name.to_string(), value.trim().to_string());
        }
        for required in kind.required_features() {
            if !features.contains_key(*required) {
                return Err(PhonologyError::MissingFeature {
                    symbol: symbol.to_string(),
                    kind,
                    feature: required.to_string(),
                    line: lineno,
                });
            }
        }

        index.insert(symbol.to_string(), phonemes.len());
        phonemes.push(Phoneme {
            symbol: symbol.to_string(),
            kind,
            features,
        });
    }

    let mut feature_weights = BTreeMap::new();
    for name in CONSONANT_FEATURES.iter().chain(VOWEL_FEATURES.iter()) {
        feature_weights.insert(name.to_string(), 1.0);
    }

    let mut inventory = PhonemeInventory {
        phonemes,
        index,
        feature_weights,
        overrides: BTreeMap::new(),
    };
    for (a, b, weight, line) in pending_overrides {
        for s in [&a, &b] {
            if !inventory.contains(s) {
                return Err(PhonologyError::OverrideUnknownSymbol {
                    symbol: s.clone(),
                    line,
                });
            }
        }
        inventory.overrides.insert(key(&a, &b), weight);
    }
    Ok(inventory)
}

/// Loads extra `!override` lines from a standalone file and applies them on
/// top of an inventory. Used for calibrated weight adjustments.
pub fn apply_override_file(
    inventory: &mut PhonemeInventory,
    path: impl AsRef<Path>,
) -> Result<usize, PhonologyError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PhonologyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut applied = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 || fields[0] != "!override" {
            return Err(PhonologyError::Malformed {
                line: lineno,
                message: "expected `!override<TAB>a<TAB>b<TAB>weight`".into(),
            });
        }
        let weight: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| PhonologyError::Malformed {
                line: lineno,
                message: format!("unparseable override weight `{}`", fields[3]),
            })?;
        if !(0.0..=1.0).contains(&weight) {
            return Err(PhonologyError::OverrideOutOfRange {
                weight,
                line: lineno,
            });
        }
        for s in [fields[1], fields[2]] {
            if !inventory.contains(s) {
                return Err(PhonologyError::OverrideUnknownSymbol {
                    symbol: s.to_string(),
                    line: lineno,
                });
            }
        }
        inventory
            .overrides
            .insert(key(fields[1], fields[2]), weight);
        applied += 1;
    }
    Ok(applied)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim_end(),
        None => line.trim_end(),
    }
}

/// Distance in [0, 1] between two inventory phonemes. An explicit override
/// wins; otherwise same-kind pairs get the weighted fraction of differing
/// features and cross-kind pairs are maximally distant.
pub fn feature_distance(
    a: &str,
    b: &str,
    inventory: &PhonemeInventory,
) -> Result<f64, PhonologyError> {
    let pa = inventory
        .get(a)
        .ok_or_else(|| PhonologyError::UnknownSymbol(a.to_string()))?;
    let pb = inventory
        .get(b)
        .ok_or_else(|| PhonologyError::UnknownSymbol(b.to_string()))?;
    if let Some(w) = inventory.override_for(a, b) {
        return Ok(w);
    }
    if a == b {
        return Ok(0.0);
    }
    if pa.kind != pb.kind {
        return Ok(1.0);
    }
    let mut total = 0.0;
    let mut differing = 0.0;
    for feature in pa.kind.required_features() {
        let w = inventory
            .feature_weights
            .get(*feature)
            .copied()
            .unwrap_or(1.0);
        total += w;
        if pa.features.get(*feature) != pb.features.get(*feature) {
            differing += w;
        }
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(differing / total)
}

/// Dense pairwise substitution costs plus the insertion/deletion cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    symbols: Vec<String>,
    index: BTreeMap<String, usize>,
    costs: Vec<f64>,
    indel_cost: f64,
}

impl WeightMatrix {
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn indel_cost(&self) -> f64 {
        self.indel_cost
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    /// Substitution cost w(a, b).
    pub fn cost(&self, a: &str, b: &str) -> Result<f64, PhonologyError> {
        let ia = *self
            .index
            .get(a)
            .ok_or_else(|| PhonologyError::UnknownSymbol(a.to_string()))?;
        let ib = *self
            .index
            .get(b)
            .ok_or_else(|| PhonologyError::UnknownSymbol(b.to_string()))?;
        Ok(self.costs[ia * self.symbols.len() + ib])
    }

    /// Rescales the (a, b) cell by `multiplier`, keeping symmetry and
    /// re-clamping the result into [0, 1]. Diagonal cells stay zero.
    pub fn scale_cost(&mut self, a: &str, b: &str, multiplier: f64) -> Result<(), PhonologyError> {
        let ia = *self
            .index
            .get(a)
            .ok_or_else(|| PhonologyError::UnknownSymbol(a.to_string()))?;
        let ib = *self
            .index
            .get(b)
            .ok_or_else(|| PhonologyError::UnknownSymbol(b.to_string()))?;
        if ia == ib {
            return Ok(());
        }
        let n = self.symbols.len();
        let scaled = (self.costs[ia * n + ib] * multiplier).clamp(0.0, 1.0);
        self.costs[ia * n + ib] = scaled;
        self.costs[ib * n + ia] = scaled;
        Ok(())
    }

    /// All off-diagonal cells that differ from `other`, as (a, b, cost) with
    /// each unordered pair reported once.
    pub fn diff(&self, other: &WeightMatrix) -> Vec<(String, String, f64)> {
        let n = self.symbols.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mine = self.costs[i * n + j];
                if other
                    .cost(&self.symbols[i], &self.symbols[j])
                    .map(|c| c != mine)
                    .unwrap_or(true)
                {
                    out.push((self.symbols[i].clone(), self.symbols[j].clone(), mine));
                }
            }
        }
        out
    }
}

/// Materializes [`feature_distance`] for every phoneme pair.
pub fn build_weight_matrix(inventory: &PhonemeInventory) -> Result<WeightMatrix, PhonologyError> {
    build_weight_matrix_with(inventory, DEFAULT_INDEL_COST)
}

pub fn build_weight_matrix_with(
    inventory: &PhonemeInventory,
    indel_cost: f64,
) -> Result<WeightMatrix, PhonologyError> {
    if !(indel_cost > 0.0 && indel_cost <= 1.0) {
        return Err(PhonologyError::InvalidIndelCost(indel_cost));
    }
    let symbols: Vec<String> = inventory
        .phonemes
        .iter()
        .map(|p| p.symbol.clone())
        .collect();
    let n = symbols.len();
    let mut costs = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = feature_distance(&symbols[i], &symbols[j], inventory)?;
            costs[i * n + j] = w;
            costs[j * n + i] = w;
        }
    }
    let index = symbols
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(WeightMatrix {
        symbols,
        index,
        costs,
        indel_cost,
    })
}
