//! Configuration: a JSON file of table paths and numeric knobs, overridden
//! field by field with command-line flags. Flags win.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use orthovar::align::{load_merge_table, MergeTable};
use orthovar::defaults;
use orthovar::g2p::{load_fallback_rules, load_lexicon, FallbackRules, PronunciationLexicon};
use orthovar::phonology::{apply_override_file, load_inventory, PhonemeInventory};
use orthovar::rules::{load_blocklist, load_rules, VariationRule};
use orthovar::{Pipeline, PipelineConfig};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

/// Paths and knobs as they appear in the JSON config file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub inventory: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub fallback: Option<PathBuf>,
    pub merge_table: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub blocklist: Option<PathBuf>,
    pub weight_overrides: Option<PathBuf>,
    pub indel_cost: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_subsets: Option<usize>,
    pub iterations: Option<usize>,
    pub skip_cost: Option<f64>,
    pub smoothing_k: Option<f64>,
    pub seed: Option<u64>,
}

/// Table-path overrides shared by every subcommand.
#[derive(Debug, Clone, clap::Args)]
pub struct TableArgs {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Phoneme inventory file (built-in table when omitted)
    #[arg(long, global = true)]
    pub inventory: Option<PathBuf>,
    /// Pronunciation lexicon file
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Letter-to-sound fallback rules file
    #[arg(long, global = true)]
    pub fallback: Option<PathBuf>,
    /// Alignment merge table file
    #[arg(long, global = true)]
    pub merge_table: Option<PathBuf>,
    /// Variation rules file
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Real-word blocklist file
    #[arg(long, global = true)]
    pub blocklist: Option<PathBuf>,
    /// Extra `!override` weight lines applied on top of the inventory
    #[arg(long, global = true)]
    pub weight_overrides: Option<PathBuf>,
    /// Insertion/deletion cost in (0, 1]
    #[arg(long, global = true)]
    pub indel_cost: Option<f64>,
    /// Zero-distance floor for sampling probabilities
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Cap on rule subsets per word
    #[arg(long, global = true)]
    pub max_subsets: Option<usize>,
    /// Aligner EM iterations
    #[arg(long, global = true)]
    pub iterations: Option<usize>,
    /// Aligner skip cost in -log space
    #[arg(long, global = true)]
    pub skip_cost: Option<f64>,
    /// Aligner add-k smoothing mass
    #[arg(long, global = true)]
    pub smoothing_k: Option<f64>,
    /// Random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print phonemes with documented ASCII aliases
    #[arg(long, global = true)]
    pub ascii: bool,
}

/// Fully resolved configuration.
pub struct Resolved {
    pub inventory: PhonemeInventory,
    pub lexicon: PronunciationLexicon,
    pub fallback: FallbackRules,
    pub merge_table: MergeTable,
    pub rules: Vec<VariationRule>,
    pub blocklist: BTreeSet<String>,
    pub pipeline_config: PipelineConfig,
    pub seed: u64,
    pub ascii: bool,
}

impl Resolved {
    pub fn into_pipeline(self) -> Result<(Pipeline, u64, bool), CliError> {
        let Resolved {
            inventory,
            lexicon,
            fallback,
            merge_table,
            rules,
            blocklist,
            pipeline_config,
            seed,
            ascii,
        } = self;
        let pipeline = Pipeline::new(
            inventory,
            lexicon,
            fallback,
            merge_table,
            rules,
            blocklist,
            pipeline_config,
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok((pipeline, seed, ascii))
    }
}

fn check_exists(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "file does not exist: {}",
            path.display()
        )))
    }
}

pub fn resolve(args: &TableArgs) -> Result<Resolved, CliError> {
    let file: ConfigFile = match &args.config {
        Some(path) => {
            check_exists(path)?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let pick = |flag: &Option<PathBuf>, file_value: &Option<PathBuf>| -> Option<PathBuf> {
        flag.clone().or_else(|| file_value.clone())
    };

    let inventory_path = pick(&args.inventory, &file.inventory);
    let lexicon_path = pick(&args.lexicon, &file.lexicon);
    let fallback_path = pick(&args.fallback, &file.fallback);
    let merge_path = pick(&args.merge_table, &file.merge_table);
    let rules_path = pick(&args.rules, &file.rules);
    let blocklist_path = pick(&args.blocklist, &file.blocklist);
    let overrides_path = pick(&args.weight_overrides, &file.weight_overrides);
    for path in [
        &inventory_path,
        &lexicon_path,
        &fallback_path,
        &merge_path,
        &rules_path,
        &blocklist_path,
        &overrides_path,
    ]
    .into_iter()
    .flatten()
    {
        check_exists(path)?;
    }

    let usage = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());

    let mut inventory = match &inventory_path {
        Some(path) => load_inventory(path).map_err(|e| usage(&e))?,
        None => defaults::inventory(),
    };
    if let Some(path) = &overrides_path {
        apply_override_file(&mut inventory, path).map_err(|e| usage(&e))?;
    }
    let lexicon = match &lexicon_path {
        Some(path) => load_lexicon(path, &inventory).map_err(|e| usage(&e))?,
        None => defaults::lexicon(&inventory),
    };
    let fallback = match &fallback_path {
        Some(path) => load_fallback_rules(path, &inventory).map_err(|e| usage(&e))?,
        None => defaults::fallback_rules(&inventory),
    };
    let merge_table = match &merge_path {
        Some(path) => load_merge_table(path).map_err(|e| usage(&e))?,
        None => defaults::merge_table(),
    };
    let rules = match &rules_path {
        Some(path) => load_rules(path).map_err(|e| usage(&e))?,
        None => defaults::rules(),
    };
    let blocklist = match &blocklist_path {
        Some(path) => load_blocklist(path).map_err(|e| usage(&e))?,
        None => defaults::blocklist(),
    };

    let defaults_config = PipelineConfig::default();
    let pipeline_config = PipelineConfig {
        indel_cost: args
            .indel_cost
            .or(file.indel_cost)
            .unwrap_or(defaults_config.indel_cost),
        epsilon: args
            .epsilon
            .or(file.epsilon)
            .unwrap_or(defaults_config.epsilon),
        max_subsets: args
            .max_subsets
            .or(file.max_subsets)
            .unwrap_or(defaults_config.max_subsets),
        iterations: args
            .iterations
            .or(file.iterations)
            .unwrap_or(defaults_config.iterations),
        skip_cost: args
            .skip_cost
            .or(file.skip_cost)
            .unwrap_or(defaults_config.skip_cost),
        smoothing_k: args
            .smoothing_k
            .or(file.smoothing_k)
            .unwrap_or(defaults_config.smoothing_k),
    };
    if !(pipeline_config.indel_cost > 0.0 && pipeline_config.indel_cost <= 1.0) {
        return Err(CliError::Usage(format!(
            "indel_cost must be in (0, 1], got {}",
            pipeline_config.indel_cost
        )));
    }
    if pipeline_config.epsilon <= 0.0 {
        return Err(CliError::Usage(format!(
            "epsilon must be > 0, got {}",
            pipeline_config.epsilon
        )));
    }
    if pipeline_config.iterations < 1 {
        return Err(CliError::Usage("iterations must be >= 1".into()));
    }
    if pipeline_config.max_subsets < 1 {
        return Err(CliError::Usage("max_subsets must be >= 1".into()));
    }
    if pipeline_config.skip_cost <= 0.0 {
        return Err(CliError::Usage(format!(
            "skip_cost must be > 0, got {}",
            pipeline_config.skip_cost
        )));
    }
    if pipeline_config.smoothing_k < 0.0 {
        return Err(CliError::Usage(format!(
            "smoothing_k must be >= 0, got {}",
            pipeline_config.smoothing_k
        )));
    }

    Ok(Resolved {
        inventory,
        lexicon,
        fallback,
        merge_table,
        rules,
        blocklist,
        pipeline_config,
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        ascii: args.ascii,
    })
}

/// Documented ASCII aliases for the built-in inventory symbols. Symbols
/// without an alias pass through unchanged.
pub const ASCII_ALIASES: &[(&str, &str)] = &[
    ("θ", "TH"),
    ("ð", "DH"),
    ("ʃ", "SH"),
    ("ʒ", "ZH"),
    ("ŋ", "NG"),
    ("j", "Y"),
    ("i", "IY"),
    ("iː", "IYY"),
    ("ɪ", "IH"),
    ("ɛ", "EH"),
    ("æ", "AE"),
    ("ɑ", "AA"),
    ("ɑː", "AAH"),
    ("ɔ", "AO"),
    ("ɔː", "AOH"),
    ("ʊ", "UH"),
    ("uː", "UW"),
    ("ʌ", "AH"),
    ("ə", "AX"),
    ("ɜː", "ER"),
    ("eɪ", "EY"),
    ("aɪ", "AY"),
    ("ɔɪ", "OY"),
    ("aʊ", "AW"),
    ("oʊ", "OW"),
];

pub fn format_phonemes(phonemes: &[String], ascii: bool) -> String {
    if !ascii {
        return phonemes.join(" ");
    }
    phonemes
        .iter()
        .map(|p| {
            ASCII_ALIASES
                .iter()
                .find(|(symbol, _)| symbol == p)
                .map(|(_, alias)| alias.to_string())
                .unwrap_or_else(|| p.clone())
        })
        .collect::<Vec<_>>()
        .join(" ")
}
