//! The variation taxonomy as data: rule loading, per-word instance
//! enumeration, variant synthesis from rule subsets, and the real-word
//! collision filter.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::align::AlignedWord;
use crate::g2p::{transcribe_fallback, FallbackRules};

/// Default cap on enumerated rule subsets per word.
pub const DEFAULT_MAX_SUBSETS: usize = 64;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: unknown rule type `{token}`")]
    UnknownRuleType { token: String, line: usize },
    #[error("line {line}: unknown position token `{token}`")]
    UnknownPosition { token: String, line: usize },
    #[error("line {line}: deletion rule with non-empty target `{target}`")]
    DeletionWithTarget { target: String, line: usize },
    #[error("line {line}: non-deletion rule with empty target")]
    EmptyTarget { line: usize },
    #[error("line {line}: empty source")]
    EmptySource { line: usize },
    #[error("line {line}: malformed line: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RuleType {
    Alternation,
    Conversion,
    Transcription,
    Deletion,
}

impl fmt::Display for RuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleType::Alternation => write!(f, "alternation"),
            RuleType::Conversion => write!(f, "conversion"),
            RuleType::Transcription => write!(f, "transcription"),
            RuleType::Deletion => write!(f, "deletion"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RulePosition {
    Initial,
    Medial,
    Final,
    All,
}

impl RulePosition {
    /// Whether a unit at `index` of `len` units satisfies this constraint.
    /// A one-unit word counts as both initial and final.
    pub fn matches(self, index: usize, len: usize) -> bool {
        match self {
            RulePosition::All => true,
            RulePosition::Initial => index == 0,
            RulePosition::Final => index + 1 == len,
            RulePosition::Medial => index > 0 && index + 1 < len,
        }
    }
}

impl fmt::Display for RulePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RulePosition::Initial => write!(f, "initial"),
            RulePosition::Medial => write!(f, "medial"),
            RulePosition::Final => write!(f, "final"),
            RulePosition::All => write!(f, "all"),
        }
    }
}

/// One rewrite pattern: replace `source` with `target` at a constrained
/// position, optionally gated on the phoneme unit the grapheme is linked to.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationRule {
    pub rule_type: RuleType,
    pub source: String,
    pub target: String,
    pub position: RulePosition,
    /// Alternative phoneme units; the link must match one of them.
    pub phoneme_condition: Option<Vec<String>>,
}

impl VariationRule {
    /// Compact `source>target` label used in CLI output and provenance.
    pub fn label(&self) -> String {
        format!("{}>{}", self.source, self.target)
    }
}

/// A rule anchored at a concrete grapheme unit of an aligned word.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleInstance {
    pub rule: VariationRule,
    pub grapheme_unit_index: usize,
}

impl RuleInstance {
    pub fn label(&self) -> String {
        format!("{}@{}", self.rule.label(), self.grapheme_unit_index)
    }
}

/// A synthesized spelling with its provenance. Distance and probability are
/// filled in by the metric and sampler stages.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantCandidate {
    pub surface: String,
    pub applied: Vec<RuleInstance>,
    pub transcription: Vec<String>,
    pub distance: Option<f64>,
    pub probability: Option<f64>,
}

/// Loads a rules file:
/// `rule_type<TAB>source<TAB>target<TAB>position[<TAB>phoneme_condition]`,
/// `#` comments, empty target for deletions, `|` between condition
/// alternatives. Rules keep file order.
pub fn load_rules(path: impl AsRef<Path>) -> Result<Vec<VariationRule>, RuleError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| RuleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_rules(&text)
}

pub fn parse_rules(text: &str) -> Result<Vec<VariationRule>, RuleError> {
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 || fields.len() > 5 {
            return Err(RuleError::Malformed {
                line: lineno,
                message: "expected `rule_type<TAB>source<TAB>target<TAB>position[<TAB>condition]`"
                    .into(),
            });
        }
        let rule_type = match fields[0].trim() {
            "alternation" => RuleType::Alternation,
            "conversion" => RuleType::Conversion,
            "transcription" => RuleType::Transcription,
            "deletion" => RuleType::Deletion,
            token => {
                return Err(RuleError::UnknownRuleType {
                    token: token.to_string(),
                    line: lineno,
                })
            }
        };
        let source = fields[1].trim().to_string();
        if source.is_empty() {
            return Err(RuleError::EmptySource { line: lineno });
        }
        let target = fields[2].trim().to_string();
        match rule_type {
            RuleType::Deletion if !target.is_empty() => {
                return Err(RuleError::DeletionWithTarget {
                    target,
                    line: lineno,
                })
            }
            RuleType::Deletion => {}
            _ if target.is_empty() => return Err(RuleError::EmptyTarget { line: lineno }),
            _ => {}
        }
        let position = match fields[3].trim() {
            "initial" => RulePosition::Initial,
            "medial" => RulePosition::Medial,
            "final" => RulePosition::Final,
            "all" => RulePosition::All,
            token => {
                return Err(RuleError::UnknownPosition {
                    token: token.to_string(),
                    line: lineno,
                })
            }
        };
        let phoneme_condition = match fields.get(4).map(|s| s.trim()) {
            Some(cond) if !cond.is_empty() => {
                Some(cond.split('|').map(|s| s.trim().to_string()).collect())
            }
            _ => None,
        };
        rules.push(VariationRule {
            rule_type,
            source,
            target,
            position,
            phoneme_condition,
        });
    }
    Ok(rules)
}

/// Loads a blocklist: one word per line, case-folded.
pub fn load_blocklist(path: impl AsRef<Path>) -> Result<BTreeSet<String>, RuleError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| RuleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_blocklist(&text))
}

pub fn parse_blocklist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| strip_comment(l).trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Every (rule, unit index) pair whose source, position constraint and
/// phoneme condition all hold, ordered by unit index then rule order.
pub fn applicable_instances(word: &AlignedWord, rules: &[VariationRule]) -> Vec<RuleInstance> {
    let len = word.grapheme_units.len();
    let mut instances = Vec::new();
    for (index, unit) in word.grapheme_units.iter().enumerate() {
        for rule in rules {
            if rule.source != *unit {
                continue;
            }
            if !rule.position.matches(index, len) {
                continue;
            }
            if let Some(alternatives) = &rule.phoneme_condition {
                match word.linked_phoneme(index) {
                    Some(linked) if alternatives.iter().any(|a| a == linked) => {}
                    _ => continue,
                }
            }
            instances.push(RuleInstance {
                rule: rule.clone(),
                grapheme_unit_index: index,
            });
        }
    }
    instances
}

/// Applies every combination of instances with pairwise-distinct unit
/// indices (bounded by `max_subsets`, smallest subsets first), rewriting all
/// of a subset's units simultaneously on the original alignment. Candidates
/// are re-transcribed through the fallback rules, deduplicated, and dropped
/// if they reproduce the seed or delete it entirely.
pub fn synthesize_variants(
    word: &AlignedWord,
    instances: &[RuleInstance],
    max_subsets: usize,
    fallback: &FallbackRules,
) -> Vec<VariantCandidate> {
    let seed: String = word.grapheme_units.concat();
    let subsets = enumerate_subsets(instances, max_subsets);

    let mut seen = BTreeSet::new();
    let mut candidates = Vec::new();
    for subset in subsets {
        let mut units = word.grapheme_units.clone();
        for &i in &subset {
            let inst = &instances[i];
            units[inst.grapheme_unit_index] = inst.rule.target.clone();
        }
        let surface = units.concat();
        if surface.is_empty() || surface == seed || !seen.insert(surface.clone()) {
            continue;
        }
        let transcription = match transcribe_fallback(&surface, fallback) {
            Ok(t) => t.phonemes,
            // A surface the letter-to-sound table cannot voice is not a
            // usable spelling variant.
            Err(_) => continue,
        };
        candidates.push(VariantCandidate {
            surface,
            applied: subset.iter().map(|&i| instances[i].clone()).collect(),
            transcription,
            distance: None,
            probability: None,
        });
    }
    candidates
}

/// Non-empty index subsets with pairwise-distinct unit indices, by
/// increasing size then lexicographic order, capped at `max_subsets`.
fn enumerate_subsets(instances: &[RuleInstance], max_subsets: usize) -> Vec<Vec<usize>> {
    let n = instances.len();
    let mut out = Vec::new();
    for size in 1..=n {
        if out.len() >= max_subsets {
            break;
        }
        let mut stack: Vec<usize> = Vec::with_capacity(size);
        extend_subsets(instances, size, 0, &mut stack, &mut out, max_subsets);
    }
    out
}

fn extend_subsets(
    instances: &[RuleInstance],
    size: usize,
    from: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    max_subsets: usize,
) {
    if out.len() >= max_subsets {
        return;
    }
    if stack.len() == size {
        out.push(stack.clone());
        return;
    }
    for i in from..instances.len() {
        let index = instances[i].grapheme_unit_index;
        if stack
            .iter()
            .any(|&j| instances[j].grapheme_unit_index == index)
        {
            continue;
        }
        stack.push(i);
        extend_subsets(instances, size, i + 1, stack, out, max_subsets);
        stack.pop();
        if out.len() >= max_subsets {
            return;
        }
    }
}

/// Drops candidates whose surface collides with a real word from the
/// blocklist (case-folded). Order is preserved.
pub fn filter_real_words(
    candidates: Vec<VariantCandidate>,
    blocklist: &BTreeSet<String>,
) -> Vec<VariantCandidate> {
    candidates
        .into_iter()
        .filter(|c| !blocklist.contains(&c.surface.to_lowercase()))
        .collect()
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim_end(),
        None => line.trim_end(),
    }
}
