//! Glue that wires the stages into one word-level pipeline:
//! transcribe -> merge -> align -> rule instances -> synthesis -> blocklist
//! filter -> distance scoring -> sampling distribution.

use std::collections::BTreeSet;

use crate::align::{
    align, merge_units, train_aligner, AlignOptions, AlignedWord, AlignmentModel, MergeTable,
    DEFAULT_ITERATIONS, DEFAULT_SKIP_COST, DEFAULT_SMOOTHING_K,
};
use crate::defaults;
use crate::g2p::{transcribe, FallbackRules, PronunciationLexicon, Transcription};
use crate::metric::score_candidates;
use crate::phonology::{
    build_weight_matrix_with, PhonemeInventory, WeightMatrix, DEFAULT_INDEL_COST,
};
use crate::rules::{
    applicable_instances, filter_real_words, synthesize_variants, VariantCandidate, VariationRule,
    DEFAULT_MAX_SUBSETS,
};
use crate::sampler::{candidate_probabilities, VariantDistribution, DEFAULT_EPSILON};
use crate::{Error, Result};

/// Numeric knobs for the pipeline; defaults match the module constants.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub indel_cost: f64,
    pub epsilon: f64,
    pub max_subsets: usize,
    pub iterations: usize,
    pub skip_cost: f64,
    pub smoothing_k: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            indel_cost: DEFAULT_INDEL_COST,
            epsilon: DEFAULT_EPSILON,
            max_subsets: DEFAULT_MAX_SUBSETS,
            iterations: DEFAULT_ITERATIONS,
            skip_cost: DEFAULT_SKIP_COST,
            smoothing_k: DEFAULT_SMOOTHING_K,
        }
    }
}

/// Immutable bundle of loaded components. Cheap to share across threads.
#[derive(Debug)]
pub struct Pipeline {
    inventory: PhonemeInventory,
    weights: WeightMatrix,
    lexicon: PronunciationLexicon,
    fallback: FallbackRules,
    merge_table: MergeTable,
    model: AlignmentModel,
    rules: Vec<VariationRule>,
    blocklist: BTreeSet<String>,
    config: PipelineConfig,
}

impl Pipeline {
    /// Builds a pipeline from loaded components, training the aligner on the
    /// lexicon.
    pub fn new(
        inventory: PhonemeInventory,
        lexicon: PronunciationLexicon,
        fallback: FallbackRules,
        merge_table: MergeTable,
        rules: Vec<VariationRule>,
        blocklist: BTreeSet<String>,
        config: PipelineConfig,
    ) -> Result<Self> {
        let weights = build_weight_matrix_with(&inventory, config.indel_cost)?;
        let mut pairs: Vec<_> = lexicon
            .entries()
            .map(|(word, phonemes)| merge_units(word, phonemes, &merge_table))
            .collect();
        pairs.sort();
        let model = train_aligner(&pairs, config.iterations)?;
        Ok(Pipeline {
            inventory,
            weights,
            lexicon,
            fallback,
            merge_table,
            model,
            rules,
            blocklist,
            config,
        })
    }

    /// Pipeline over the built-in data tables.
    pub fn from_defaults() -> Result<Self> {
        Self::from_defaults_with(PipelineConfig::default())
    }

    pub fn from_defaults_with(config: PipelineConfig) -> Result<Self> {
        let inventory = defaults::inventory();
        let lexicon = defaults::lexicon(&inventory);
        let fallback = defaults::fallback_rules(&inventory);
        Self::new(
            inventory,
            lexicon,
            fallback,
            defaults::merge_table(),
            defaults::rules(),
            defaults::blocklist(),
            config,
        )
    }

    pub fn inventory(&self) -> &PhonemeInventory {
        &self.inventory
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    /// Swaps in a different weight matrix (e.g. a calibrated one).
    pub fn set_weights(&mut self, weights: WeightMatrix) {
        self.weights = weights;
    }

    pub fn lexicon(&self) -> &PronunciationLexicon {
        &self.lexicon
    }

    pub fn fallback(&self) -> &FallbackRules {
        &self.fallback
    }

    pub fn merge_table(&self) -> &MergeTable {
        &self.merge_table
    }

    pub fn model(&self) -> &AlignmentModel {
        &self.model
    }

    pub fn rules(&self) -> &[VariationRule] {
        &self.rules
    }

    pub fn blocklist(&self) -> &BTreeSet<String> {
        &self.blocklist
    }

    pub fn config(&self) -> PipelineConfig {
        self.config
    }

    pub fn transcribe(&self, word: &str) -> Result<Transcription> {
        Ok(transcribe(word, &self.lexicon, &self.fallback)?)
    }

    /// Transcribes and aligns one (case-folded) word.
    pub fn aligned(&self, word: &str) -> Result<AlignedWord> {
        let folded = word.trim().to_lowercase();
        let transcription = self.transcribe(&folded)?;
        let (graphemes, phonemes) =
            merge_units(&folded, &transcription.phonemes, &self.merge_table);
        let options = AlignOptions {
            skip_cost: self.config.skip_cost,
            smoothing_k: self.config.smoothing_k,
        };
        Ok(align(&folded, &graphemes, &phonemes, &self.model, options)?)
    }

    /// Synthesized, blocklist-filtered, distance-scored candidates for one
    /// word. An empty vector means the word passes through unchanged.
    pub fn candidates(&self, word: &str) -> Result<Vec<VariantCandidate>> {
        let seed = self.transcribe(word)?;
        let aligned_word = self.aligned(word)?;
        let instances = applicable_instances(&aligned_word, &self.rules);
        if instances.is_empty() {
            return Ok(Vec::new());
        }
        let candidates = synthesize_variants(
            &aligned_word,
            &instances,
            self.config.max_subsets,
            &self.fallback,
        );
        let candidates = filter_real_words(candidates, &self.blocklist);
        Ok(score_candidates(&seed, candidates, &self.weights)?)
    }

    /// Full sampling distribution for one word, or `None` when no candidate
    /// survives.
    pub fn distribution(&self, word: &str) -> Result<Option<VariantDistribution>> {
        let candidates = self.candidates(word)?;
        if candidates.is_empty() {
            return Ok(None);
        }
        candidate_probabilities(candidates, self.config.epsilon)
            .map(Some)
            .map_err(Error::from)
    }
}
