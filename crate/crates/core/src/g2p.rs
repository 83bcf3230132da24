//! Grapheme-to-phoneme transcription: pronunciation-lexicon lookup with a
//! deterministic longest-match letter-to-sound fallback for everything else.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::phonology::PhonemeInventory;

#[derive(Debug, Error)]
pub enum G2pError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: word `{word}` uses phoneme `{token}` not in the inventory")]
    UnknownPhoneme {
        word: String,
        token: String,
        line: usize,
    },
    #[error("line {line}: word `{word}` already defined with a different pronunciation")]
    ConflictingDuplicate { word: String, line: usize },
    #[error("line {line}: malformed line: {message}")]
    Malformed { line: usize, message: String },
    #[error("empty word")]
    EmptyWord,
    #[error("word `{0}` has no transcribable letters")]
    NoLetters(String),
    #[error("word `{word}`: no fallback rule covers `{ch}` at offset {offset}")]
    UncoveredChar {
        word: String,
        ch: char,
        offset: usize,
    },
    #[error("word {index} (`{word}`): {source}")]
    Batch {
        index: usize,
        word: String,
        source: Box<G2pError>,
    },
}

/// Case-folded word -> phoneme sequence.
#[derive(Debug, Clone)]
pub struct PronunciationLexicon {
    entries: HashMap<String, Vec<String>>,
    source: PathBuf,
}

impl PronunciationLexicon {
    pub fn lookup(&self, word: &str) -> Option<&[String]> {
        self.entries.get(&word.to_lowercase()).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self) -> &Path {
        &self.source
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(w, p)| (w.as_str(), p.as_slice()))
    }
}

/// Loads a lexicon file (`word<TAB>phoneme phoneme ...`, `#` comments) and
/// validates every token against the inventory.
pub fn load_lexicon(
    path: impl AsRef<Path>,
    inventory: &PhonemeInventory,
) -> Result<PronunciationLexicon, G2pError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| G2pError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lexicon = parse_lexicon(&text, inventory)?;
    lexicon.source = path.to_path_buf();
    Ok(lexicon)
}

pub fn parse_lexicon(
    text: &str,
    inventory: &PhonemeInventory,
) -> Result<PronunciationLexicon, G2pError> {
    let mut entries: HashMap<String, Vec<String>> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (word, phonemes) = line.split_once('\t').ok_or_else(|| G2pError::Malformed {
            line: lineno,
            message: "expected `word<TAB>phoneme phoneme ...`".into(),
        })?;
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(G2pError::Malformed {
                line: lineno,
                message: "empty word".into(),
            });
        }
        let tokens: Vec<String> = phonemes.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return Err(G2pError::Malformed {
                line: lineno,
                message: format!("word `{word}` has an empty pronunciation"),
            });
        }
        for token in &tokens {
            if !inventory.contains(token) {
                return Err(G2pError::UnknownPhoneme {
                    word,
                    token: token.clone(),
                    line: lineno,
                });
            }
        }
        match entries.get(&word) {
            Some(existing) if *existing != tokens => {
                return Err(G2pError::ConflictingDuplicate { word, line: lineno });
            }
            _ => {
                entries.insert(word, tokens);
            }
        }
    }
    Ok(PronunciationLexicon {
        entries,
        source: PathBuf::new(),
    })
}

/// Ordered letter-to-sound rules. Applied left to right with longest match;
/// ties between equal-length units go to the earlier rule.
#[derive(Debug, Clone)]
pub struct FallbackRules {
    rules: Vec<(String, Vec<String>)>,
}

impl FallbackRules {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Segments `word` and returns (grapheme unit, phonemes) steps.
    fn apply(&self, word: &str) -> Result<Vec<(String, Vec<String>)>, G2pError> {
        let chars: Vec<char> = word.chars().collect();
        let mut steps = Vec::new();
        let mut pos = 0;
        while pos < chars.len() {
            let mut best: Option<&(String, Vec<String>)> = None;
            let mut best_len = 0;
            for rule in &self.rules {
                let unit_len = rule.0.chars().count();
                if unit_len <= best_len || pos + unit_len > chars.len() {
                    continue;
                }
                if rule
                    .0
                    .chars()
                    .eq(chars[pos..pos + unit_len].iter().copied())
                {
                    best = Some(rule);
                    best_len = unit_len;
                }
            }
            match best {
                Some((unit, phonemes)) => {
                    steps.push((unit.clone(), phonemes.clone()));
                    pos += best_len;
                }
                None => {
                    return Err(G2pError::UncoveredChar {
                        word: word.to_string(),
                        ch: chars[pos],
                        offset: pos,
                    })
                }
            }
        }
        Ok(steps)
    }
}

/// Loads a fallback rules file (`grapheme-unit<TAB>phoneme phoneme ...`,
/// empty phoneme side = silent).
pub fn load_fallback_rules(
    path: impl AsRef<Path>,
    inventory: &PhonemeInventory,
) -> Result<FallbackRules, G2pError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| G2pError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fallback_rules(&text, inventory)
}

pub fn parse_fallback_rules(
    text: &str,
    inventory: &PhonemeInventory,
) -> Result<FallbackRules, G2pError> {
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        // Keep trailing tabs: a silent rule's phoneme side is empty.
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let (unit, phonemes) = line.split_once('\t').ok_or_else(|| G2pError::Malformed {
            line: lineno,
            message: "expected `grapheme-unit<TAB>phonemes`".into(),
        })?;
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(G2pError::Malformed {
                line: lineno,
                message: "empty grapheme unit".into(),
            });
        }
        let tokens: Vec<String> = phonemes.split_whitespace().map(str::to_string).collect();
        for token in &tokens {
            if !inventory.contains(token) {
                return Err(G2pError::UnknownPhoneme {
                    word: unit.to_string(),
                    token: token.clone(),
                    line: lineno,
                });
            }
        }
        rules.push((unit.to_string(), tokens));
    }
    Ok(FallbackRules { rules })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    Lexicon,
    Fallback,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Lexicon => write!(f, "lexicon"),
            Provenance::Fallback => write!(f, "fallback"),
        }
    }
}

/// A word plus its phoneme sequence and where the pronunciation came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcription {
    pub word: String,
    pub phonemes: Vec<String>,
    pub provenance: Provenance,
}

/// Transcribes one word. Lexicon entries win; anything else goes through the
/// fallback rules. Lookups are case-folded.
pub fn transcribe(
    word: &str,
    lexicon: &PronunciationLexicon,
    fallback: &FallbackRules,
) -> Result<Transcription, G2pError> {
    let trimmed = word.trim();
    if trimmed.is_empty() {
        return Err(G2pError::EmptyWord);
    }
    if !trimmed.chars().any(|c| c.is_alphabetic()) {
        return Err(G2pError::NoLetters(trimmed.to_string()));
    }
    let folded = trimmed.to_lowercase();
    if let Some(phonemes) = lexicon.lookup(&folded) {
        return Ok(Transcription {
            word: trimmed.to_string(),
            phonemes: phonemes.to_vec(),
            provenance: Provenance::Lexicon,
        });
    }
    transcribe_fallback(trimmed, fallback)
}

/// Transcribes through the fallback rules only, bypassing the lexicon. Used
/// for synthesized spellings, which are out-of-vocabulary by construction.
pub fn transcribe_fallback(
    word: &str,
    fallback: &FallbackRules,
) -> Result<Transcription, G2pError> {
    let trimmed = word.trim();
    if trimmed.is_empty() {
        return Err(G2pError::EmptyWord);
    }
    let folded = trimmed.to_lowercase();
    let steps = fallback.apply(&folded)?;
    let phonemes: Vec<String> = steps.into_iter().flat_map(|(_, p)| p).collect();
    if phonemes.is_empty() {
        return Err(G2pError::NoLetters(trimmed.to_string()));
    }
    Ok(Transcription {
        word: trimmed.to_string(),
        phonemes,
        provenance: Provenance::Fallback,
    })
}

/// Elementwise [`transcribe`]; errors carry the failing word's index.
pub fn transcribe_batch(
    words: &[String],
    lexicon: &PronunciationLexicon,
    fallback: &FallbackRules,
) -> Result<Vec<Transcription>, G2pError> {
    words
        .iter()
        .enumerate()
        .map(|(index, word)| {
            transcribe(word, lexicon, fallback).map_err(|e| G2pError::Batch {
                index,
                word: word.clone(),
                source: Box::new(e),
            })
        })
        .collect()
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
    use crate::phonology::PhonemeInventory;

    fn setup() -> (PhonemeInventory, PronunciationLexicon, FallbackRules) {
        let inv = defaults::inventory();
        let lex = defaults::lexicon(&inv);
        let fb = defaults::fallback_rules(&inv);
        (inv, lex, fb)
    }

    #[test]
    fn lookup_is_case_folded() {
        let inv = defaults::inventory();
        let lex = parse_lexicon("anything\tɛ n ɪ θ ɪ ŋ\n", &inv).unwrap();
        let pron = lex.lookup("Anything").unwrap();
        assert_eq!(pron, ["ɛ", "n", "ɪ", "θ", "ɪ", "ŋ"]);
    }

    #[test]
    fn unknown_phoneme_token_named() {
        let inv = defaults::inventory();
        let err = parse_lexicon("word\tzz ɪ\n", &inv).unwrap_err();
        assert!(matches!(err, G2pError::UnknownPhoneme { ref token, .. } if token == "zz"));
    }

    #[test]
    fn empty_lexicon_is_valid() {
        let inv = defaults::inventory();
        let lex = parse_lexicon("", &inv).unwrap();
        assert!(lex.is_empty());
    }

    #[test]
    fn conflicting_duplicate_rejected_identical_allowed() {
        let inv = defaults::inventory();
        let err = parse_lexicon("see\ts iː\nsee\ts ɪ\n", &inv).unwrap_err();
        assert!(matches!(err, G2pError::ConflictingDuplicate { .. }));
        let ok = parse_lexicon("see\ts iː\nsee\ts iː\n", &inv).unwrap();
        assert_eq!(ok.len(), 1);
    }

    #[test]
    fn transcribes_the_worked_example() {
        let (_, lex, fb) = setup();
        let t = transcribe("anything", &lex, &fb).unwrap();
        assert_eq!(t.phonemes, ["ɛ", "n", "ɪ", "θ", "ɪ", "ŋ"]);
        assert_eq!(t.provenance, Provenance::Lexicon);
    }

    #[test]
    fn empty_word_is_an_error() {
        let (_, lex, fb) = setup();
        assert!(matches!(
            transcribe("", &lex, &fb),
            Err(G2pError::EmptyWord)
        ));
        assert!(matches!(
            transcribe("  ", &lex, &fb),
            Err(G2pError::EmptyWord)
        ));
    }

    #[test]
    fn fallback_is_deterministic() {
        let (_, lex, fb) = setup();
        let a = transcribe("bikos", &lex, &fb).unwrap();
        let b = transcribe("bikos", &lex, &fb).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.phonemes, ["b", "ɪ", "k", "ɔ", "s"]);
        assert_eq!(a.provenance, Provenance::Fallback);
    }

    #[test]
    fn lexicon_takes_precedence_over_fallback() {
        let inv = defaults::inventory();
        let lex = parse_lexicon("bikos\tm uː\n", &inv).unwrap();
        let fb = defaults::fallback_rules(&inv);
        let t = transcribe("bikos", &lex, &fb).unwrap();
        assert_eq!(t.phonemes, ["m", "uː"]);
        assert_eq!(t.provenance, Provenance::Lexicon);
    }

    #[test]
    fn uncovered_char_reports_char_and_offset() {
        let inv = defaults::inventory();
        let lex = parse_lexicon("", &inv).unwrap();
        let fb = parse_fallback_rules("a\tæ\n", &inv).unwrap();
        let err = transcribe("aba", &lex, &fb).unwrap_err();
        match err {
            G2pError::UncoveredChar { ch, offset, .. } => {
                assert_eq!(ch, 'b');
                assert_eq!(offset, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn batch_preserves_order_and_sees_homophones() {
        let (_, lex, fb) = setup();
        let out = transcribe_batch(&["see".to_string(), "si".to_string()], &lex, &fb).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].phonemes, out[1].phonemes);

        let empty = transcribe_batch(&[], &lex, &fb).unwrap();
        assert!(empty.is_empty());

        let thing = transcribe_batch(&["thing".to_string()], &lex, &fb).unwrap();
        assert_eq!(thing[0].phonemes, ["θ", "ɪ", "ŋ"]);
    }

    #[test]
    fn batch_error_carries_index() {
        let (_, lex, fb) = setup();
        let err = transcribe_batch(&["see".to_string(), "".to_string()], &lex, &fb).unwrap_err();
        assert!(matches!(err, G2pError::Batch { index: 1, .. }));
    }

    #[test]
    fn longest_match_beats_file_order() {
        let inv = defaults::inventory();
        // `t` appears before `th` in this table; longest match must still win.
        let fb = parse_fallback_rules("t\tt\nh\th\nth\tθ\n", &inv).unwrap();
        let t = transcribe_fallback("th", &fb).unwrap();
        assert_eq!(t.phonemes, ["θ"]);
    }

    #[test]
    fn fallback_output_tokens_are_inventory_symbols() {
        let (inv, lex, fb) = setup();
        for word in [
            "bikos", "kom", "lata", "wont", "prich", "betta", "anotha", "difren",
        ] {
            let t = transcribe(word, &lex, &fb).unwrap();
            for token in &t.phonemes {
                assert!(inv.contains(token), "{word}: token {token}");
            }
        }
    }
}
