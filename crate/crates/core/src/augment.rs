//! Corpus-level augmentation: pick K sentences, replace every word that has
//! a surviving variant with one sampled spelling, and emit the augmented
//! data with full provenance and variant statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::pipeline::Pipeline;
use crate::sampler::{derive_seed, sample_variant, seeded_rng};
use crate::Error;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { path: String, offset: usize },
    #[error("K must be >= 1")]
    KZero,
    #[error("K = {k} exceeds corpus size m = {m}")]
    KTooLarge { k: usize, m: usize },
    #[error("sentence {sentence}, token {token} (`{word}`): {source}")]
    Word {
        sentence: usize,
        token: usize,
        word: String,
        source: Box<Error>,
    },
    #[error("parallel target has {target_lines} lines but corpus has {source_lines}")]
    TargetMismatch {
        source_lines: usize,
        target_lines: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TokenKind {
    Word,
    Punct,
}

/// A token's byte span within its raw line.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

/// Sentences with their tokenization. Byte spans index the raw lines, so
/// splicing replacements back in reproduces everything between tokens.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub sentences: Vec<String>,
    pub tokens: Vec<Vec<Token>>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn from_lines<I: IntoIterator<Item = String>>(lines: I) -> Corpus {
        let sentences: Vec<String> = lines.into_iter().collect();
        let tokens = sentences.iter().map(|s| tokenize(s)).collect();
        Corpus { sentences, tokens }
    }

    /// Case-folded word-type vocabulary.
    pub fn type_vocabulary(&self) -> BTreeSet<String> {
        let mut types = BTreeSet::new();
        for (sentence, tokens) in self.sentences.iter().zip(&self.tokens) {
            for token in tokens {
                if token.kind == TokenKind::Word {
                    types.insert(sentence[token.start..token.end].to_lowercase());
                }
            }
        }
        types
    }

    /// Case-folded token counts.
    pub fn token_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for (sentence, tokens) in self.sentences.iter().zip(&self.tokens) {
            for token in tokens {
                if token.kind == TokenKind::Word {
                    *counts
                        .entry(sentence[token.start..token.end].to_lowercase())
                        .or_insert(0) += 1;
                }
            }
        }
        counts
    }
}

/// Words are maximal runs of letters/apostrophes containing at least one
/// letter; other non-whitespace runs are punctuation; whitespace separates
/// tokens and is preserved through the spans.
pub fn tokenize(line: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut iter = line.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        let wordish = |c: char| c.is_alphabetic() || c == '\'';
        let mut end = start;
        let mut has_letter = false;
        if wordish(c) {
            while let Some(&(i, c)) = iter.peek() {
                if !wordish(c) {
                    break;
                }
                has_letter |= c.is_alphabetic();
                end = i + c.len_utf8();
                iter.next();
            }
        } else {
            while let Some(&(i, c)) = iter.peek() {
                if c.is_whitespace() || wordish(c) {
                    break;
                }
                end = i + c.len_utf8();
                iter.next();
            }
        }
        tokens.push(Token {
            start,
            end,
            kind: if has_letter {
                TokenKind::Word
            } else {
                TokenKind::Punct
            },
        });
    }
    tokens
}

/// Loads a one-sentence-per-line UTF-8 corpus.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, AugmentError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| AugmentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| AugmentError::InvalidUtf8 {
        path: path.display().to_string(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(Corpus::from_lines(text.lines().map(str::to_string)))
}

/// One word replacement inside an augmented sentence.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SubstitutionRecord {
    pub token_index: usize,
    /// Byte span of the original word in the source line.
    pub source_span: (usize, usize),
    /// Byte span of the variant in the augmented line.
    pub target_span: (usize, usize),
    pub original: String,
    pub variant: String,
    pub rules: Vec<String>,
    pub distance: f64,
    pub probability: f64,
}

/// Where an augmented sentence came from and what changed in it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SentenceProvenance {
    pub source_index: usize,
    pub seed: u64,
    pub substitutions: Vec<SubstitutionRecord>,
}

/// The augmented sentences plus per-sentence provenance.
#[derive(Debug, Clone)]
pub struct AugmentedCorpus {
    pub sentences: Vec<String>,
    pub provenance: Vec<SentenceProvenance>,
    pub k: usize,
    pub seed: u64,
}

impl AugmentedCorpus {
    pub fn as_corpus(&self) -> Corpus {
        Corpus::from_lines(self.sentences.iter().cloned())
    }
}

/// Matches the seed's leading capitalization on the variant.
fn match_case(seed: &str, variant: &str) -> String {
    let seed_first = match seed.chars().next() {
        Some(c) => c,
        None => return variant.to_string(),
    };
    if seed_first.is_uppercase() {
        let mut chars = variant.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
            None => variant.to_string(),
        }
    } else {
        variant.to_string()
    }
}

/// Rewrites one tokenized sentence: every word token with at least one
/// surviving candidate is replaced by a sampled variant; punctuation and
/// candidate-less words pass through.
pub fn augment_sentence(
    line: &str,
    tokens: &[Token],
    pipeline: &Pipeline,
    rng: &mut crate::sampler::SampleRng,
) -> Result<(String, Vec<SubstitutionRecord>), (usize, String, Error)> {
    let mut out = String::with_capacity(line.len());
    let mut records = Vec::new();
    let mut cursor = 0;
    for (token_index, token) in tokens.iter().enumerate() {
        out.push_str(&line[cursor..token.start]);
        let text = &line[token.start..token.end];
        cursor = token.end;
        if token.kind == TokenKind::Punct {
            out.push_str(text);
            continue;
        }
        let dist = pipeline
            .distribution(text)
            .map_err(|e| (token_index, text.to_string(), e))?;
        match dist {
            None => out.push_str(text),
            Some(dist) => {
                let chosen = sample_variant(&dist, rng);
                let variant = match_case(text, &chosen.surface);
                let target_start = out.len();
                out.push_str(&variant);
                records.push(SubstitutionRecord {
                    token_index,
                    source_span: (token.start, token.end),
                    target_span: (target_start, target_start + variant.len()),
                    original: text.to_string(),
                    variant,
                    rules: chosen.applied.iter().map(|i| i.label()).collect(),
                    distance: chosen.distance.unwrap_or(0.0),
                    probability: chosen.probability.unwrap_or(0.0),
                });
            }
        }
    }
    out.push_str(&line[cursor..]);
    Ok((out, records))
}

/// Options for [`augment_corpus`].
#[derive(Debug, Clone, Copy)]
pub struct AugmentOptions {
    pub k: usize,
    pub seed: u64,
    /// Process sentences on the rayon pool. Output is identical either way:
    /// each sentence owns a generator derived from (seed, source index) and
    /// results are assembled in source order.
    pub parallel: bool,
}

/// Uniformly selects K source indices without replacement, augments each
/// selected sentence, and returns the augmented sentences in source order.
pub fn augment_corpus(
    corpus: &Corpus,
    pipeline: &Pipeline,
    options: AugmentOptions,
) -> Result<AugmentedCorpus, AugmentError> {
    let m = corpus.len();
    if options.k == 0 {
        return Err(AugmentError::KZero);
    }
    if options.k > m {
        return Err(AugmentError::KTooLarge { k: options.k, m });
    }

    let selected = select_indices(m, options.k, options.seed);

    let run = |&index: &usize| -> Result<(String, SentenceProvenance), AugmentError> {
        let sentence_seed = derive_seed(options.seed, index as u64);
        let mut rng = seeded_rng(sentence_seed);
        let (augmented, substitutions) = augment_sentence(
            &corpus.sentences[index],
            &corpus.tokens[index],
            pipeline,
            &mut rng,
        )
        .map_err(|(token, word, source)| AugmentError::Word {
            sentence: index,
            token,
            word,
            source: Box::new(source),
        })?;
        Ok((
            augmented,
            SentenceProvenance {
                source_index: index,
                seed: sentence_seed,
                substitutions,
            },
        ))
    };

    let results: Result<Vec<_>, AugmentError> = if options.parallel {
        selected.par_iter().map(run).collect()
    } else {
        selected.iter().map(run).collect()
    };
    let (sentences, provenance) = results?.into_iter().unzip();

    Ok(AugmentedCorpus {
        sentences,
        provenance,
        k: options.k,
        seed: options.seed,
    })
}

/// First K positions of a seeded Fisher-Yates permutation, sorted back into
/// source order. For a fixed seed the selection at K is a prefix of the
/// selection at any larger K.
fn select_indices(m: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded_rng(seed);
    let mut indices: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = rand::Rng::random_range(&mut rng, i..m);
        indices.swap(i, j);
    }
    let mut selected = indices[..k].to_vec();
    selected.sort_unstable();
    selected
}

/// Writes all source lines followed by all augmented lines.
pub fn emit_union(
    corpus: &Corpus,
    augmented: &AugmentedCorpus,
    path: impl AsRef<Path>,
) -> Result<(), AugmentError> {
    let path = path.as_ref();
    let mut out = fs::File::create(path).map_err(|source| AugmentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let write = |out: &mut fs::File, line: &str| -> Result<(), AugmentError> {
        writeln!(out, "{line}").map_err(|source| AugmentError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    for line in &corpus.sentences {
        write(&mut out, line)?;
    }
    for line in &augmented.sentences {
        write(&mut out, line)?;
    }
    Ok(())
}

/// Target-side lines for a parallel corpus: originals first, then the
/// translation of each augmented row duplicated so line counts stay equal.
pub fn union_target_lines(
    target_lines: &[String],
    source_len: usize,
    augmented: &AugmentedCorpus,
) -> Result<Vec<String>, AugmentError> {
    if target_lines.len() != source_len {
        return Err(AugmentError::TargetMismatch {
            source_lines: source_len,
            target_lines: target_lines.len(),
        });
    }
    let mut out = target_lines.to_vec();
    for provenance in &augmented.provenance {
        out.push(target_lines[provenance.source_index].clone());
    }
    Ok(out)
}

/// Frequency table plus the count of word types introduced by augmentation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VariantStats {
    pub type_counts: BTreeMap<String, usize>,
    pub new_variant_count: usize,
}

/// Counts word types in the augmented data that never occur in the source
/// corpus. `type_counts` holds the augmented-side token counts of those new
/// types.
pub fn count_new_variants(corpus: &Corpus, augmented: &AugmentedCorpus) -> VariantStats {
    new_types(corpus, &augmented.as_corpus())
}

/// Same comparison over two plain corpora (used by the stats command).
pub fn new_types(base: &Corpus, other: &Corpus) -> VariantStats {
    let base_types = base.type_vocabulary();
    let mut type_counts = other.token_counts();
    type_counts.retain(|t, _| !base_types.contains(t));
    VariantStats {
        new_variant_count: type_counts.len(),
        type_counts,
    }
}

/// Token counts for each surface in `variant_groups`, case-folded. Surfaces
/// absent from the corpus report zero.
pub fn variant_frequency(
    corpus: &Corpus,
    variant_groups: &[BTreeSet<String>],
) -> BTreeMap<String, usize> {
    let counts = corpus.token_counts();
    let mut out = BTreeMap::new();
    for group in variant_groups {
        for surface in group {
            let folded = surface.to_lowercase();
            let count = counts.get(&folded).copied().unwrap_or(0);
            out.insert(folded, count);
        }
    }
    out
}
