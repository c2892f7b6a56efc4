use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use pm2s_core::align::{build_training_pair, chunk as split_chunks, score_beat_positions, AlignReport, RefineConfig};
use pm2s_core::augment::{augment as apply_augment, AugmentConfig};
use pm2s_core::reconstruct::reconstruct;
use pm2s_core::tokenizer::{encode_performance, encode_score_report, surrogate_input, InputSequence, OutputSequence};
use pm2s_core::{QuantGrid, Score};

use super::files::{display, emit_manifest, list_inputs, read_performance, read_score, read_text, thread_pool, write_file, InputKind};
use super::GlobalArgs;
use crate::beats::parse_beats;
use crate::manifest::RunManifest;
use crate::midi::write_midi;
use crate::musicxml::{write_musicxml, ParseOptions};
use crate::tokens::TokenFile;
use crate::{Error, Result};

#[derive(Serialize)]
struct Config<'a, T: Serialize> {
    global: &'a GlobalArgs,
    command: T,
}

fn grid(g: &GlobalArgs) -> Result<QuantGrid> {
    let grid = QuantGrid::with_epsilon(g.epsilon);
    grid.validate().map_err(|_| Error::Usage(format!("invalid --epsilon {}", g.epsilon)))?;
    if !(g.epsilon > 0.0 && g.epsilon.is_finite()) {
        return Err(Error::Usage(format!("invalid --epsilon {}", g.epsilon)));
    }
    Ok(grid)
}

fn parse_options(g: &GlobalArgs) -> ParseOptions {
    ParseOptions { anacrusis: g.anacrusis_mode }
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

type Counters = Vec<(&'static str, Value)>;

fn counter(name: &'static str, report: &impl Serialize) -> (&'static str, Value) {
    (name, serde_json::to_value(report).expect("serializable"))
}

fn tokenize_one(path: &Path, grid: &QuantGrid, opts: &ParseOptions, surrogate: bool) -> Result<(TokenFile, Counters)> {
    match InputKind::of(path) {
        Some(InputKind::Midi) => {
            if surrogate {
                return Err(Error::Usage(format!("{}: --surrogate applies to MusicXML input only", path.display())));
            }
            let (perf, midi) = read_performance(path)?;
            let seq = encode_performance(&perf, grid).map_err(|source| Error::Tokenize { path: path.into(), source })?;
            Ok((TokenFile::from_input(&seq, grid), vec![counter("midi", &midi), ("frames", seq.len().into())]))
        }
        Some(InputKind::MusicXml) => {
            let (score, parse) = read_score(path, opts)?;
            let (seq, enc) = encode_score_report(&score).map_err(|source| Error::Tokenize { path: path.into(), source })?;
            let file = if surrogate { TokenFile::from_input(&surrogate_input(&seq), grid) } else { TokenFile::from_output(&seq) };
            Ok((file, vec![counter("musicxml", &parse), counter("encode", &enc), ("frames", seq.len().into())]))
        }
        None => Err(Error::Usage(format!("{}: unknown input type (expected .mid, .midi, .xml or .musicxml)", path.display()))),
    }
}

fn add_counters(m: &mut RunManifest, counters: &Counters) {
    for (name, v) in counters {
        match v {
            Value::Number(n) => m.count(name, n.as_u64().unwrap_or(0)),
            _ => m.add(name, v),
        }
    }
}

pub fn tokenize(g: &GlobalArgs, input: &Path, output: &Path, surrogate: bool) -> Result<()> {
    let grid = grid(g)?;
    let opts = parse_options(g);
    let config = Config { global: g, command: ("tokenize", surrogate) };
    if input.is_dir() {
        let files = list_inputs(input)?;
        let pool = thread_pool(g.jobs)?;
        let results: Vec<Result<(TokenFile, Counters)>> =
            pool.install(|| files.par_iter().map(|f| tokenize_one(f, &grid, &opts, surrogate)).collect());
        let mut manifest = RunManifest::new("tokenize", files.iter().map(|f| display(f)).collect(), &config, g.seed);
        std::fs::create_dir_all(output).map_err(|source| Error::Io { path: output.into(), source })?;
        for (f, r) in files.iter().zip(results) {
            let (file, counters) = r?;
            let name = format!("{}.json", f.file_name().unwrap_or_default().to_string_lossy());
            write_file(&output.join(name), file.to_json())?;
            add_counters(&mut manifest, &counters);
            manifest.count("files", 1);
        }
        emit_manifest(&manifest, g.manifest.as_deref(), Some(output))
    } else {
        let (file, counters) = tokenize_one(input, &grid, &opts, surrogate)?;
        write_file(output, file.to_json())?;
        let mut manifest = RunManifest::new("tokenize", vec![display(input)], &config, g.seed);
        add_counters(&mut manifest, &counters);
        manifest.count("files", 1);
        emit_manifest(&manifest, g.manifest.as_deref(), Some(output))
    }
}

fn read_tokens(path: &Path) -> Result<TokenFile> {
    TokenFile::from_json(&read_text(path)?).map_err(|source| Error::Tokens { path: path.into(), source })
}

pub fn detokenize(g: &GlobalArgs, input: &Path, output: &Path) -> Result<()> {
    let seq = read_tokens(input)?.to_output().map_err(|source| Error::Tokens { path: input.into(), source })?;
    let (score, rec) = reconstruct(&seq);
    let (text, wr) = write_musicxml(&score);
    write_file(output, text)?;
    let mut manifest = RunManifest::new("detokenize", vec![display(input)], &Config { global: g, command: "detokenize" }, g.seed);
    manifest.add("reconstruct", &rec);
    manifest.add("write", &wr);
    emit_manifest(&manifest, g.manifest.as_deref(), Some(output))
}

#[derive(Serialize)]
struct AlignedFile {
    input: TokenFile,
    output: TokenFile,
    interval_lengths: Vec<usize>,
    report: AlignReport,
}

pub fn align(g: &GlobalArgs, midi: &Path, musicxml: &Path, beats: &Path, output: &Path) -> Result<()> {
    let grid = grid(g)?;
    let beat_times = parse_beats(&read_text(beats)?).map_err(|source| Error::Beats { path: beats.into(), source })?;
    let (perf, mr) = read_performance(midi)?;
    let (score, pr) = read_score(musicxml, &parse_options(g))?;
    let cfg = RefineConfig::default();
    let pair = build_training_pair(&perf, &score, &beat_times, &score_beat_positions(&score), &grid, &cfg)
        .map_err(|source| Error::Align { path: musicxml.into(), source })?;
    let file = AlignedFile {
        input: TokenFile::from_input(&pair.input, &grid),
        output: TokenFile::from_output(&pair.output),
        interval_lengths: pair.interval_lengths,
        report: pair.report,
    };
    write_file(output, to_json(&file))?;
    let inputs = vec![display(midi), display(musicxml), display(beats)];
    let mut manifest = RunManifest::new("align", inputs, &Config { global: g, command: ("align", cfg.window, cfg.max_passes) }, g.seed);
    manifest.add("midi", &mr);
    manifest.add("musicxml", &pr);
    manifest.add("align", &pair.report);
    emit_manifest(&manifest, g.manifest.as_deref(), Some(output))
}

pub fn augment(
    g: &GlobalArgs,
    cfg: &AugmentConfig,
    midi: &Path,
    musicxml: Option<&Path>,
    out_midi: &Path,
    out_musicxml: Option<&Path>,
) -> Result<()> {
    if out_musicxml.is_some() && musicxml.is_none() {
        return Err(Error::Usage("--out-musicxml needs --musicxml".into()));
    }
    let (perf, _) = read_performance(midi)?;
    let score = match musicxml {
        Some(p) => read_score(p, &parse_options(g))?.0,
        None => Score::default(),
    };
    let (perf, score, report) = apply_augment(&perf, &score, cfg)?;
    write_file(out_midi, write_midi(&perf))?;
    let mut inputs = vec![display(midi)];
    let manifest_cfg = Config { global: g, command: *cfg };
    if let (Some(src), Some(out)) = (musicxml, out_musicxml) {
        inputs.push(display(src));
        let (text, wr) = write_musicxml(&score);
        write_file(out, text)?;
        let mut manifest = RunManifest::new("augment", inputs, &manifest_cfg, g.seed);
        manifest.add("augment", &report);
        manifest.add("write", &wr);
        return emit_manifest(&manifest, g.manifest.as_deref(), Some(out_midi));
    }
    let mut manifest = RunManifest::new("augment", inputs, &manifest_cfg, g.seed);
    manifest.add("augment", &report);
    emit_manifest(&manifest, g.manifest.as_deref(), Some(out_midi))
}

#[derive(Serialize)]
struct ChunkEntry {
    start: usize,
    tokens: TokenFile,
}

#[derive(Serialize)]
struct ChunkFile {
    window: usize,
    overlap: usize,
    length: usize,
    chunks: Vec<ChunkEntry>,
}

pub fn chunk(g: &GlobalArgs, input: &Path, output: &Path) -> Result<()> {
    let file = read_tokens(input)?;
    let bad = |source| Error::Tokens { path: input.into(), source };
    let split = |e| Error::Usage(format!("{e}"));
    let (length, chunks) = if file.kind == "input" {
        let seq = file.to_input().map_err(bad)?;
        let grid = file.grid();
        let chunks = split_chunks(&seq.frames, g.window, g.overlap).map_err(split)?;
        let entries = chunks
            .into_iter()
            .map(|c| ChunkEntry { start: c.start, tokens: TokenFile::from_input(&InputSequence::new(c.frames), &grid) })
            .collect();
        (seq.len(), entries)
    } else {
        let seq = file.to_output().map_err(bad)?;
        let chunks = split_chunks(&seq.frames, g.window, g.overlap).map_err(split)?;
        let entries =
            chunks.into_iter().map(|c| ChunkEntry { start: c.start, tokens: TokenFile::from_output(&OutputSequence::new(c.frames)) }).collect();
        (seq.len(), entries)
    };
    let out = ChunkFile { window: g.window, overlap: g.overlap, length, chunks };
    write_file(output, to_json(&out))?;
    let mut manifest = RunManifest::new("chunk", vec![display(input)], &Config { global: g, command: "chunk" }, g.seed);
    manifest.count("chunks", out.chunks.len() as u64);
    manifest.count("frames", length as u64);
    emit_manifest(&manifest, g.manifest.as_deref(), Some(output))
}
