//! Subcommand implementations.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use orthovar::align::{self, merge_units, AlignOptions, AlignmentModel};
use orthovar::augment::{
    augment_corpus, emit_union, load_corpus, new_types, union_target_lines, variant_frequency,
    AugmentOptions,
};
use orthovar::metric::{self, levenshtein, load_calibration, pwld};
use orthovar::Pipeline;

use crate::config::{format_phonemes, resolve, TableArgs};
use crate::CliError;

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn build_pipeline(tables: &TableArgs) -> Result<(Pipeline, u64, bool), CliError> {
    resolve(tables)?.into_pipeline()
}

pub fn transcribe(
    tables: &TableArgs,
    words: Vec<String>,
    file: Option<PathBuf>,
) -> Result<(), CliError> {
    if words.iter().any(|w| w.trim().is_empty()) {
        return Err(CliError::Usage("empty word".into()));
    }
    let mut all = words;
    if let Some(path) = &file {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        all.extend(
            text.lines()
                .map(str::to_string)
                .filter(|l| !l.trim().is_empty()),
        );
    }
    if all.is_empty() {
        return Err(CliError::Usage("no words given".into()));
    }
    let (pipeline, _, ascii) = build_pipeline(tables)?;
    let mut failed = false;
    for word in &all {
        match pipeline.transcribe(word) {
            Ok(t) => println!(
                "{word}\t{}\t{}",
                format_phonemes(&t.phonemes, ascii),
                t.provenance
            ),
            Err(e) => {
                println!("{word}\tERROR\t{e}");
                failed = true;
            }
        }
    }
    if failed {
        Err(CliError::Runtime("one or more words failed".into()))
    } else {
        Ok(())
    }
}

pub fn variants(tables: &TableArgs, word: &str) -> Result<(), CliError> {
    if word.trim().is_empty() {
        return Err(CliError::Usage("empty word".into()));
    }
    let (pipeline, _, _) = build_pipeline(tables)?;
    let distribution = pipeline.distribution(word).map_err(runtime)?;
    let Some(distribution) = distribution else {
        return Ok(());
    };
    let folded = word.trim().to_lowercase();
    let mut rows: Vec<_> = distribution.candidates.iter().collect();
    rows.sort_by(|a, b| {
        b.probability
            .partial_cmp(&a.probability)
            .unwrap()
            .then_with(|| a.surface.cmp(&b.surface))
    });
    for candidate in rows {
        let rules: Vec<String> = candidate.applied.iter().map(|i| i.label()).collect();
        println!(
            "{}\t{}\t{}\t{:.4}\t{:.9}",
            candidate.surface,
            rules.join(","),
            levenshtein(&folded, &candidate.surface),
            candidate.distance.unwrap_or(f64::NAN),
            candidate.probability.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

pub fn dist(tables: &TableArgs, seed: &str, variant: &str) -> Result<(), CliError> {
    if seed.trim().is_empty() || variant.trim().is_empty() {
        return Err(CliError::Usage("empty word".into()));
    }
    let (pipeline, _, _) = build_pipeline(tables)?;
    let ts = pipeline.transcribe(seed).map_err(runtime)?;
    let tv = pipeline.transcribe(variant).map_err(runtime)?;
    let d = pwld(&ts.phonemes, &tv.phonemes, pipeline.weights()).map_err(runtime)?;
    println!(
        "{}\t{}\t{}\t{:.4}",
        seed.trim(),
        variant.trim(),
        levenshtein(&seed.trim().to_lowercase(), &variant.trim().to_lowercase()),
        d
    );
    Ok(())
}

pub fn align_train(tables: &TableArgs, out: &Path) -> Result<(), CliError> {
    let (pipeline, _, _) = build_pipeline(tables)?;
    // The pipeline already trained on the resolved lexicon; persist it.
    pipeline.model().save(out).map_err(runtime)?;
    let lls = pipeline.model().log_likelihoods();
    println!(
        "trained on {} lexicon entries, {} iterations, final log-likelihood {:.3}",
        pipeline.lexicon().len(),
        pipeline.model().iterations_trained(),
        lls.last().copied().unwrap_or(f64::NAN)
    );
    println!("model written to {}", out.display());
    Ok(())
}

pub fn align(tables: &TableArgs, word: &str, model: Option<PathBuf>) -> Result<(), CliError> {
    if word.trim().is_empty() {
        return Err(CliError::Usage("empty word".into()));
    }
    let (pipeline, _, ascii) = build_pipeline(tables)?;
    let aligned = match model {
        Some(path) => {
            let model = AlignmentModel::load(&path)
                .map_err(|e| CliError::Usage(format!("cannot load model: {e}")))?;
            let folded = word.trim().to_lowercase();
            let transcription = pipeline.transcribe(&folded).map_err(runtime)?;
            let (g, p) = merge_units(&folded, &transcription.phonemes, pipeline.merge_table());
            let options = AlignOptions {
                skip_cost: pipeline.config().skip_cost,
                smoothing_k: pipeline.config().smoothing_k,
            };
            align::align(&folded, &g, &p, &model, options).map_err(runtime)?
        }
        None => pipeline.aligned(word).map_err(runtime)?,
    };
    for (index, unit) in aligned.grapheme_units.iter().enumerate() {
        match aligned.linked_phoneme(index) {
            Some(phoneme) => {
                let shown = format_phonemes(&[phoneme.to_string()], ascii);
                println!("{unit}\u{2192}{shown}");
            }
            None => println!("{unit}\u{2192}\u{2205}"),
        }
    }
    Ok(())
}

pub fn calibrate(tables: &TableArgs, labels: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let data = load_calibration(labels).map_err(|e| CliError::Usage(e.to_string()))?;
    let (pipeline, _, _) = build_pipeline(tables)?;
    let result = metric::calibrate(pipeline.weights(), &data, |word| {
        pipeline
            .transcribe(word)
            .map(|t| t.phonemes)
            .map_err(|e| metric::MetricError::Item {
                index: 0,
                message: e.to_string(),
            })
    })
    .map_err(runtime)?;
    println!("items\t{}", data.items.len());
    println!("baseline_accuracy\t{:.4}", result.baseline_accuracy);
    println!("calibrated_accuracy\t{:.4}", result.accuracy);
    println!("threshold\t{:.4}", result.threshold);
    if let Some(path) = out {
        let changed = result.weights.diff(pipeline.weights());
        let mut text = String::new();
        for (a, b, cost) in &changed {
            text.push_str(&format!("!override\t{a}\t{b}\t{cost}\n"));
        }
        fs::write(&path, text).map_err(runtime)?;
        println!("adjusted_pairs\t{}", changed.len());
        println!("overrides written to {}", path.display());
    }
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct AugmentArgs {
    /// Source corpus, one sentence per line
    #[arg(long)]
    pub input: PathBuf,
    /// Translation side of a parallel corpus, same line count as input
    #[arg(long)]
    pub parallel_target: Option<PathBuf>,
    /// Where to write the augmented target side (requires --parallel-target)
    #[arg(long)]
    pub out_target: Option<PathBuf>,
    /// Number of sentences to augment
    #[arg(long)]
    pub k: Option<usize>,
    /// Fraction of the corpus to augment, in (0, 1]
    #[arg(long, conflicts_with = "k")]
    pub k_frac: Option<f64>,
    /// Where to write the augmented sentences
    #[arg(long)]
    pub out: PathBuf,
    /// Also write source+augmented union files (suffix .union)
    #[arg(long)]
    pub emit_union: bool,
    /// Write one JSON provenance record per augmented sentence
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    /// Worker threads: 1 forces sequential processing, 0 uses all cores
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

pub fn augment(tables: &TableArgs, args: AugmentArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.input).map_err(|e| CliError::Usage(e.to_string()))?;
    let m = corpus.len();
    let k = match (args.k, args.k_frac) {
        (Some(k), _) => k,
        (None, Some(f)) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(CliError::Usage(format!(
                    "--k-frac must be in (0, 1], got {f}"
                )));
            }
            ((m as f64) * f).round().max(1.0) as usize
        }
        (None, None) => return Err(CliError::Usage("one of --k or --k-frac is required".into())),
    };
    if k == 0 {
        return Err(CliError::Usage("K must be >= 1".into()));
    }
    if k > m {
        return Err(CliError::Usage(format!(
            "K = {k} exceeds corpus size m = {m}"
        )));
    }
    let target_lines: Option<Vec<String>> = match (&args.parallel_target, &args.out_target) {
        (Some(path), Some(_)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let lines: Vec<String> = text.lines().map(str::to_string).collect();
            if lines.len() != m {
                return Err(CliError::Usage(format!(
                    "parallel target has {} lines but corpus has {m}",
                    lines.len()
                )));
            }
            Some(lines)
        }
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "--parallel-target and --out-target go together".into(),
            ))
        }
    };

    let resolved = resolve(tables)?;
    let seed = resolved.seed;
    let (pipeline, _, _) = resolved.into_pipeline()?;

    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .ok();
    }
    let options = AugmentOptions {
        k,
        seed,
        parallel: args.threads != 1,
    };
    let augmented = augment_corpus(&corpus, &pipeline, options).map_err(runtime)?;

    write_lines(&args.out, &augmented.sentences)?;
    if args.emit_union {
        let union_path = suffixed(&args.out, ".union");
        emit_union(&corpus, &augmented, &union_path).map_err(runtime)?;
    }
    if let (Some(target_lines), Some(out_target)) = (&target_lines, &args.out_target) {
        let augmented_targets: Vec<String> = augmented
            .provenance
            .iter()
            .map(|p| target_lines[p.source_index].clone())
            .collect();
        write_lines(out_target, &augmented_targets)?;
        if args.emit_union {
            let union = union_target_lines(target_lines, m, &augmented).map_err(runtime)?;
            write_lines(&suffixed(out_target, ".union"), &union)?;
        }
    }
    if let Some(path) = &args.provenance {
        let mut out = fs::File::create(path).map_err(runtime)?;
        for record in &augmented.provenance {
            let line = serde_json::to_string(record).map_err(runtime)?;
            writeln!(out, "{line}").map_err(runtime)?;
        }
    }
    println!(
        "augmented {k} of {m} sentences (seed {seed}) -> {}",
        args.out.display()
    );
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut text = lines.join("\n");
    if !lines.is_empty() {
        text.push('\n');
    }
    fs::write(path, text).map_err(runtime)
}

pub fn stats(input: &Path, against: &Path, groups: &[String]) -> Result<(), CliError> {
    let input_corpus = load_corpus(input).map_err(|e| CliError::Usage(e.to_string()))?;
    let against_corpus = load_corpus(against).map_err(|e| CliError::Usage(e.to_string()))?;
    let stats = new_types(&against_corpus, &input_corpus);
    let mut json = serde_json::json!({
        "new_variant_count": stats.new_variant_count,
        "type_counts": stats.type_counts,
    });
    if !groups.is_empty() {
        let sets: Vec<BTreeSet<String>> = groups
            .iter()
            .map(|g| g.split(',').map(|w| w.trim().to_lowercase()).collect())
            .collect();
        let counts = variant_frequency(&input_corpus, &sets);
        json["group_counts"] = serde_json::json!(counts);
    }
    println!("{}", serde_json::to_string_pretty(&json).map_err(runtime)?);
    Ok(())
}
