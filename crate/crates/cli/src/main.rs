//! `orthovar`: synthesize spelling variants of phonetically written words
//! and build variation-augmented corpora.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Errors carry their exit code: 2 for usage/validation, 1 for runtime.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "orthovar",
    version,
    about = "Spelling-variant synthesis and corpus augmentation"
)]
struct Cli {
    #[command(flatten)]
    tables: config::TableArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transcribe words to phoneme sequences
    Transcribe {
        /// Words to transcribe
        words: Vec<String>,
        /// Read words from a file, one per line
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// List scored variant candidates for one word
    Variants { word: String },
    /// Distances between a seed word and one variant
    Dist {
        #[arg(value_name = "SEED")]
        seed_word: String,
        variant: String,
    },
    /// Train the character-phoneme aligner on the lexicon and save it
    AlignTrain {
        /// Where to write the model
        #[arg(long)]
        out: PathBuf,
    },
    /// Show the character-phoneme alignment of a word
    Align {
        word: String,
        /// Previously trained model; trains from the lexicon when omitted
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Fit weight adjustments and a good/bad threshold from labeled variants
    Calibrate {
        /// Labeled file with `seed<TAB>variant<TAB>good|bad` lines
        #[arg(long)]
        labels: PathBuf,
        /// Write adjusted pairs as `!override` lines
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Augment a corpus with variant-substituted sentences
    Augment(commands::AugmentArgs),
    /// Count word types introduced by an augmented corpus
    Stats {
        /// Corpus to analyze (usually the augmented data)
        #[arg(long)]
        input: PathBuf,
        /// Reference corpus to compare against
        #[arg(long)]
        against: PathBuf,
        /// Comma-separated variant group to count, repeatable
        #[arg(long = "group")]
        groups: Vec<String>,
    },
}

fn main() -> ExitCode {
    // Die quietly when the consumer of a pipe goes away (e.g. `| head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transcribe { words, file } => commands::transcribe(&cli.tables, words, file),
        Command::Variants { word } => commands::variants(&cli.tables, &word),
        Command::Dist { seed_word, variant } => commands::dist(&cli.tables, &seed_word, &variant),
        Command::AlignTrain { out } => commands::align_train(&cli.tables, &out),
        Command::Align { word, model } => commands::align(&cli.tables, &word, model),
        Command::Calibrate { labels, out } => commands::calibrate(&cli.tables, &labels, out),
        Command::Augment(args) => commands::augment(&cli.tables, args),
        Command::Stats {
            input,
            against,
            groups,
        } => commands::stats(&input, &against, &groups),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("orthovar: {}", error.message());
            ExitCode::from(error.code())
        }
    }
}
