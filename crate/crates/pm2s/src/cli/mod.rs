//! The `pm2s` command line.

mod commands;
mod eval;
mod files;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::musicxml::AnacrusisMode;
use crate::Result;

pub use files::{read_performance, read_score, InputKind};

#[derive(Debug, Parser)]
#[command(name = "pm2s", version, about = "Performance MIDI and MusicXML tokenization, alignment and evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Offset of the logarithmic timing grid, in seconds.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, global = true, default_value_t = 512)]
    pub window: usize,
    #[arg(long, global = true, default_value_t = 64)]
    pub overlap: usize,
    /// Storage of a short first measure when reading MusicXML.
    #[arg(long, global = true, value_enum, default_value_t)]
    pub anacrusis_mode: AnacrusisMode,
    /// Worker threads for directory inputs (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a MIDI or MusicXML file, or a directory of them, as token JSON.
    Tokenize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// For MusicXML, write the masked conditioning input instead of score tokens.
        #[arg(long)]
        surrogate: bool,
    },
    /// Rebuild MusicXML from a score token file.
    Detokenize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build a beat-aligned training pair.
    Align {
        #[arg(long)]
        midi: PathBuf,
        #[arg(long)]
        musicxml: PathBuf,
        #[arg(long)]
        beats: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare predicted scores with references (files or directories).
    Eval {
        reference: PathBuf,
        prediction: PathBuf,
        /// Report path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the note alignment as CSV.
        #[arg(long)]
        pairs_csv: Option<PathBuf>,
    },
    /// Apply transposition, tempo change and timing jitter.
    Augment {
        #[arg(long)]
        midi: PathBuf,
        #[arg(long)]
        musicxml: Option<PathBuf>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        transpose: i32,
        #[arg(long, default_value_t = 1.0)]
        tempo: f64,
        /// Half-width of the per-note duration factor.
        #[arg(long, default_value_t = 0.0)]
        duration_jitter: f64,
        /// Standard deviation of the per-interval onset factor.
        #[arg(long, default_value_t = 0.0)]
        onset_jitter: f64,
        #[arg(long)]
        out_midi: PathBuf,
        #[arg(long)]
        out_musicxml: Option<PathBuf>,
    },
    /// Split a token file into overlapping windows.
    Chunk {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tokenize { .. } => "tokenize",
            Command::Detokenize { .. } => "detokenize",
            Command::Align { .. } => "align",
            Command::Eval { .. } => "eval",
            Command::Augment { .. } => "augment",
            Command::Chunk { .. } => "chunk",
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Tokenize { input, output, surrogate } => commands::tokenize(g, input, output, *surrogate),
        Command::Detokenize { input, output } => commands::detokenize(g, input, output),
        Command::Align { midi, musicxml, beats, output } => commands::align(g, midi, musicxml, beats, output),
        Command::Eval { reference, prediction, output, pairs_csv } => {
            eval::eval(g, reference, prediction, output.as_deref(), pairs_csv.as_deref())
        }
        Command::Augment { midi, musicxml, transpose, tempo, duration_jitter, onset_jitter, out_midi, out_musicxml } => {
            let cfg = pm2s_core::augment::AugmentConfig {
                transpose_semitones: *transpose,
                tempo_lambda: *tempo,
                duration_noise: *duration_jitter,
                onset_noise: *onset_jitter,
                seed: g.seed,
            };
            commands::augment(g, &cfg, midi, musicxml.as_deref(), out_midi, out_musicxml.as_deref())
        }
        Command::Chunk { input, output } => commands::chunk(g, input, output),
    }
}
