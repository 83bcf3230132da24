//! Spelling-variant synthesis for phonetically written text.
//!
//! Words in languages without a settled orthography are spelled the way they
//! sound, so one spoken word surfaces in text under many spellings
//! (because / bikos / cos). This crate generates such variants on purpose:
//! it transcribes a word to phonemes, aligns letters to sounds, applies a
//! taxonomy of position-constrained rewrite rules, scores every candidate by
//! a phonologically weighted edit distance, and samples replacements with
//! probability inversely proportional to that distance. On top of the word
//! machinery sits a corpus augmenter that rewrites a random subset of
//! sentences and emits the augmented data alongside the original.

pub mod align;
pub mod augment;
pub mod defaults;
pub mod g2p;
pub mod metric;
pub mod phonology;
pub mod pipeline;
pub mod rules;
pub mod sampler;

pub use pipeline::{Pipeline, PipelineConfig};

use thiserror::Error;

/// Unified error type for pipeline-level code paths.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Phonology(#[from] phonology::PhonologyError),
    #[error(transparent)]
    G2p(#[from] g2p::G2pError),
    #[error(transparent)]
    Align(#[from] align::AlignError),
    #[error(transparent)]
    Rules(#[from] rules::RuleError),
    #[error(transparent)]
    Metric(#[from] metric::MetricError),
    #[error(transparent)]
    Sampler(#[from] sampler::SamplerError),
    #[error(transparent)]
    Augment(#[from] augment::AugmentError),
}

pub type Result<T> = std::result::Result<T, Error>;
