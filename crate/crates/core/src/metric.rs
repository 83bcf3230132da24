//! Edit distances: plain Levenshtein over graphemes, the phonologically
//! weighted variant over phoneme sequences, and weight calibration against
//! good/bad-labeled variants.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::g2p::Transcription;
use crate::phonology::{PhonologyError, WeightMatrix};
use crate::rules::VariantCandidate;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    UnknownUnit(#[from] PhonologyError),
    #[error("line {line}: malformed line: {message}")]
    Malformed { line: usize, message: String },
    #[error("calibration data is empty")]
    EmptyCalibration,
    #[error("calibration data has only `{0}` labels; need both good and bad")]
    SingleLabel(String),
    #[error("calibration item {index}: {message}")]
    Item { index: usize, message: String },
}

/// Grapheme edit distance plus phonological distance for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub ld: usize,
    pub pwld: f64,
}

/// Standard unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost_sub = diagonal + usize::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = cost_sub.min(row[j] + 1).min(diagonal + 1);
        }
    }
    row[b.len()]
}

/// Phonologically weighted Levenshtein distance: substitution costs come
/// from the weight matrix, insertions and deletions cost `indel_cost`, and
/// the result is an unnormalized sum.
pub fn pwld(t1: &[String], t2: &[String], weights: &WeightMatrix) -> Result<f64, MetricError> {
    for unit in t1.iter().chain(t2.iter()) {
        if !weights.contains(unit) {
            return Err(MetricError::UnknownUnit(PhonologyError::UnknownSymbol(
                unit.clone(),
            )));
        }
    }
    let indel = weights.indel_cost();
    let mut row: Vec<f64> = (0..=t2.len()).map(|j| j as f64 * indel).collect();
    for (i, a) in t1.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = (i + 1) as f64 * indel;
        for (j, b) in t2.iter().enumerate() {
            let sub = diagonal + weights.cost(a, b).expect("units pre-checked");
            diagonal = row[j + 1];
            row[j + 1] = sub.min(row[j] + indel).min(diagonal + indel);
        }
    }
    Ok(row[t2.len()])
}

/// Distances for one (seed, variant) surface pair.
pub fn distance_report(
    seed_surface: &str,
    variant_surface: &str,
    seed_phonemes: &[String],
    variant_phonemes: &[String],
    weights: &WeightMatrix,
) -> Result<DistanceReport, MetricError> {
    Ok(DistanceReport {
        ld: levenshtein(seed_surface, variant_surface),
        pwld: pwld(seed_phonemes, variant_phonemes, weights)?,
    })
}

/// Fills each candidate's distance with the phonological distance from the
/// seed transcription. Order is preserved.
pub fn score_candidates(
    seed: &Transcription,
    mut candidates: Vec<VariantCandidate>,
    weights: &WeightMatrix,
) -> Result<Vec<VariantCandidate>, MetricError> {
    for candidate in &mut candidates {
        candidate.distance = Some(pwld(&seed.phonemes, &candidate.transcription, weights)?);
    }
    Ok(candidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Good,
    Bad,
}

/// Variants hand-labeled as plausible or implausible spellings of a seed.
#[derive(Debug, Clone)]
pub struct CalibrationSet {
    pub items: Vec<(String, String, Label)>,
}

/// Loads `seed<TAB>variant<TAB>good|bad` lines.
pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibrationSet, MetricError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MetricError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_calibration(&text)
}

pub fn parse_calibration(text: &str) -> Result<CalibrationSet, MetricError> {
    let mut items = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(MetricError::Malformed {
                line: lineno,
                message: "expected `seed<TAB>variant<TAB>good|bad`".into(),
            });
        }
        let label = match fields[2].trim() {
            "good" => Label::Good,
            "bad" => Label::Bad,
            other => {
                return Err(MetricError::Malformed {
                    line: lineno,
                    message: format!("unknown label `{other}`"),
                })
            }
        };
        let seed = fields[0].trim().to_string();
        let variant = fields[1].trim().to_string();
        if seed == variant {
            return Err(MetricError::Malformed {
                line: lineno,
                message: "seed equals variant".into(),
            });
        }
        items.push((seed, variant, label));
    }
    Ok(CalibrationSet { items })
}

/// Best-accuracy threshold for the classifier `pwld <= tau -> good`.
/// Candidate thresholds are the midpoints between consecutive distinct
/// distances plus sentinels outside the range, so a separable set gets the
/// midpoint of its separating gap.
pub fn best_threshold(scored: &[(f64, Label)]) -> (f64, f64) {
    let mut distances: Vec<f64> = scored.iter().map(|(d, _)| *d).collect();
    distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distances.dedup();
    let mut candidates = Vec::with_capacity(distances.len() + 1);
    if let (Some(first), Some(last)) = (distances.first(), distances.last()) {
        candidates.push(first - 1.0);
        for w in distances.windows(2) {
            candidates.push((w[0] + w[1]) / 2.0);
        }
        candidates.push(last + 1.0);
    } else {
        candidates.push(0.0);
    }
    let mut best = (candidates[0], -1.0);
    for tau in candidates {
        let acc = accuracy(scored, tau);
        if acc > best.1 {
            best = (tau, acc);
        }
    }
    best
}

fn accuracy(scored: &[(f64, Label)], tau: f64) -> f64 {
    if scored.is_empty() {
        return 0.0;
    }
    let correct = scored
        .iter()
        .filter(|(d, label)| match label {
            Label::Good => *d <= tau,
            Label::Bad => *d > tau,
        })
        .count();
    correct as f64 / scored.len() as f64
}

/// Phoneme pairs substituted along one optimal PWLD alignment, excluding
/// identical pairs and indels.
fn alignment_substitutions(
    t1: &[String],
    t2: &[String],
    weights: &WeightMatrix,
) -> Result<Vec<(String, String)>, MetricError> {
    let indel = weights.indel_cost();
    let n = t1.len();
    let m = t2.len();
    let mut cost = vec![0.0f64; (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    for i in 0..=n {
        cost[idx(i, 0)] = i as f64 * indel;
    }
    for j in 0..=m {
        cost[idx(0, j)] = j as f64 * indel;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = cost[idx(i - 1, j - 1)]
                + weights
                    .cost(&t1[i - 1], &t2[j - 1])
                    .map_err(MetricError::UnknownUnit)?;
            let del = cost[idx(i - 1, j)] + indel;
            let ins = cost[idx(i, j - 1)] + indel;
            cost[idx(i, j)] = sub.min(del).min(ins);
        }
    }
    let mut subs = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        let here = cost[idx(i, j)];
        let sub = cost[idx(i - 1, j - 1)] + weights.cost(&t1[i - 1], &t2[j - 1]).unwrap();
        if (here - sub).abs() < 1e-12 {
            if t1[i - 1] != t2[j - 1] {
                subs.push((t1[i - 1].clone(), t2[j - 1].clone()));
            }
            i -= 1;
            j -= 1;
        } else if (here - (cost[idx(i - 1, j)] + indel)).abs() < 1e-12 {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    Ok(subs)
}

/// Outcome of [`calibrate`].
#[derive(Debug, Clone)]
pub struct Calibration {
    pub weights: WeightMatrix,
    pub threshold: f64,
    pub baseline_accuracy: f64,
    pub accuracy: f64,
}

const MULTIPLIER_GRID: [f64; 6] = [0.25, 0.5, 0.8, 1.25, 2.0, 4.0];
const MAX_PASSES: usize = 3;

/// Coordinate descent over per-pair multiplicative adjustments: only pairs
/// substituted in some item's optimal alignment are touched, a multiplier is
/// kept only when it strictly improves threshold accuracy, and every result
/// is re-clamped into [0, 1]. The returned accuracy therefore never drops
/// below the input matrix's best-threshold accuracy.
pub fn calibrate<F>(
    weights: &WeightMatrix,
    data: &CalibrationSet,
    mut transcribe: F,
) -> Result<Calibration, MetricError>
where
    F: FnMut(&str) -> Result<Vec<String>, MetricError>,
{
    if data.items.is_empty() {
        return Err(MetricError::EmptyCalibration);
    }
    let goods = data
        .items
        .iter()
        .filter(|(_, _, l)| *l == Label::Good)
        .count();
    if goods == 0 {
        return Err(MetricError::SingleLabel("bad".into()));
    }
    if goods == data.items.len() {
        return Err(MetricError::SingleLabel("good".into()));
    }

    let mut transcribed = Vec::with_capacity(data.items.len());
    for (index, (seed, variant, label)) in data.items.iter().enumerate() {
        let ts = transcribe(seed).map_err(|e| MetricError::Item {
            index,
            message: e.to_string(),
        })?;
        let tv = transcribe(variant).map_err(|e| MetricError::Item {
            index,
            message: e.to_string(),
        })?;
        transcribed.push((ts, tv, *label));
    }

    let score_all = |w: &WeightMatrix| -> Result<Vec<(f64, Label)>, MetricError> {
        transcribed
            .iter()
            .map(|(ts, tv, label)| Ok((pwld(ts, tv, w)?, *label)))
            .collect()
    };

    let baseline_scored = score_all(weights)?;
    let (baseline_tau, baseline_accuracy) = best_threshold(&baseline_scored);

    // Pairs participating in some item's optimal alignment under the
    // starting matrix.
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for (ts, tv, _) in &transcribed {
        for (a, b) in alignment_substitutions(ts, tv, weights)? {
            let pair = if a <= b { (a, b) } else { (b, a) };
            pairs.insert(pair);
        }
    }

    let mut current = weights.clone();
    let mut current_tau = baseline_tau;
    let mut current_accuracy = baseline_accuracy;

    for _ in 0..MAX_PASSES {
        let mut improved = false;
        for (a, b) in &pairs {
            for &multiplier in &MULTIPLIER_GRID {
                let mut trial = current.clone();
                trial.scale_cost(a, b, multiplier)?;
                let scored = score_all(&trial)?;
                let (tau, acc) = best_threshold(&scored);
                if acc > current_accuracy {
                    current = trial;
                    current_tau = tau;
                    current_accuracy = acc;
                    improved = true;
                }
            }
        }
        if !improved || current_accuracy >= 1.0 {
            break;
        }
    }

    Ok(Calibration {
        weights: current,
        threshold: current_tau,
        baseline_accuracy,
        accuracy: current_accuracy,
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim_end(),
        None => line.trim_end(),
    }
}
