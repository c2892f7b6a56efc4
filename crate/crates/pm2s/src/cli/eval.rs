use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use pm2s_core::metrics::{aggregate, count_matched, match_pitches, MetricCounts, MetricReport};
use pm2s_core::{Score, Tick};

use super::files::{display, emit_manifest, list_inputs, read_score, thread_pool, write_file, InputKind};
use super::GlobalArgs;
use crate::manifest::RunManifest;
use crate::musicxml::ParseOptions;
use crate::{Error, Result};

#[derive(Debug, Serialize)]
struct PieceReport {
    name: String,
    reference_notes: usize,
    predicted_notes: usize,
    report: MetricReport,
}

#[derive(Debug, Serialize)]
struct BatchReport {
    /// Pieces are weighted by their reference note count.
    weighting: &'static str,
    pieces: Vec<PieceReport>,
    aggregate: MetricReport,
}

#[derive(Debug, Serialize)]
struct PairRow {
    piece: String,
    status: &'static str,
    ref_index: Option<usize>,
    pred_index: Option<usize>,
    pitch: u8,
    ref_onset: Option<Tick>,
    pred_onset: Option<Tick>,
    ref_duration: Option<Tick>,
    pred_duration: Option<Tick>,
}

struct Piece {
    name: String,
    counts: MetricCounts,
    rows: Vec<PairRow>,
}

fn evaluate(name: String, reference: &Score, prediction: &Score) -> Piece {
    let a = reference.flat_notes();
    let b = prediction.flat_notes();
    let pa: Vec<u8> = a.iter().map(|(_, n)| n.pitch).collect();
    let pb: Vec<u8> = b.iter().map(|(_, n)| n.pitch).collect();
    let m = match_pitches(&pa, &pb);
    let counts = count_matched(&a, &b, &m);

    let mut rows = Vec::with_capacity(a.len() + b.len() - m.pairs.len());
    let row = |status, i: Option<usize>, j: Option<usize>| PairRow {
        piece: name.clone(),
        status,
        ref_index: i,
        pred_index: j,
        pitch: i.map(|i| a[i].1.pitch).or(j.map(|j| b[j].1.pitch)).unwrap_or_default(),
        ref_onset: i.map(|i| a[i].0),
        pred_onset: j.map(|j| b[j].0),
        ref_duration: i.map(|i| a[i].1.duration),
        pred_duration: j.map(|j| b[j].1.duration),
    };
    let (mut i, mut j) = (0, 0);
    for &(pi, pj) in m.pairs.iter().chain(std::iter::once(&(a.len(), b.len()))) {
        while i < pi {
            rows.push(row("miss", Some(i), None));
            i += 1;
        }
        while j < pj {
            rows.push(row("extra", None, Some(j)));
            j += 1;
        }
        if pi < a.len() {
            rows.push(row("match", Some(pi), Some(pj)));
            i += 1;
            j += 1;
        }
    }
    Piece { name, counts, rows }
}

fn piece_report(p: &Piece) -> PieceReport {
    PieceReport { name: p.name.clone(), reference_notes: p.counts.reference_notes, predicted_notes: p.counts.predicted_notes, report: p.counts.report() }
}

fn name_of(p: &Path) -> String {
    p.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

fn pairs(reference: &Path, prediction: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    if reference.is_dir() != prediction.is_dir() {
        return Err(Error::Usage("reference and prediction must both be files or both be directories".into()));
    }
    if !reference.is_dir() {
        return Ok(vec![(reference.into(), prediction.into())]);
    }
    let files: Vec<PathBuf> = list_inputs(reference)?.into_iter().filter(|p| InputKind::of(p) == Some(InputKind::MusicXml)).collect();
    files
        .into_iter()
        .map(|r| {
            let p = prediction.join(r.file_name().unwrap_or_default());
            if p.is_file() {
                Ok((r, p))
            } else {
                Err(Error::Usage(format!("no prediction {} for reference {}", p.display(), r.display())))
            }
        })
        .collect()
}

pub fn eval(g: &GlobalArgs, reference: &Path, prediction: &Path, output: Option<&Path>, pairs_csv: Option<&Path>) -> Result<()> {
    let opts = ParseOptions { anacrusis: g.anacrusis_mode };
    let list = pairs(reference, prediction)?;
    let pool = thread_pool(g.jobs)?;
    let pieces: Vec<Result<Piece>> = pool.install(|| {
        list.par_iter()
            .map(|(r, p)| {
                let (rs, _) = read_score(r, &opts)?;
                let (ps, _) = read_score(p, &opts)?;
                Ok(evaluate(name_of(r), &rs, &ps))
            })
            .collect()
    });
    let pieces = pieces.into_iter().collect::<Result<Vec<_>>>()?;

    let json = if reference.is_dir() {
        let batch = BatchReport {
            weighting: "reference_notes",
            pieces: pieces.iter().map(piece_report).collect(),
            aggregate: aggregate(pieces.iter().map(|p| &p.counts)),
        };
        serde_json::to_string_pretty(&batch)
    } else {
        serde_json::to_string_pretty(&piece_report(&pieces[0]))
    }
    .map_err(|e| Error::Internal(e.to_string()))?
        + "\n";
    match output {
        Some(o) => write_file(o, &json)?,
        None => print!("{json}"),
    }

    if let Some(csv_path) = pairs_csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in pieces.iter().flat_map(|p| &p.rows) {
            w.serialize(row).map_err(|e| Error::Internal(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        write_file(csv_path, bytes)?;
    }

    let inputs = list.iter().flat_map(|(r, p)| [display(r), display(p)]).collect();
    let mut manifest = RunManifest::new("eval", inputs, &("eval", g), g.seed);
    for p in &pieces {
        manifest.count("pieces", 1);
        manifest.count("reference_notes", p.counts.reference_notes as u64);
        manifest.count("predicted_notes", p.counts.predicted_notes as u64);
        manifest.count("matched", p.counts.matched as u64);
    }
    emit_manifest(&manifest, g.manifest.as_deref(), output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pm2s_core::{Measure, ScoreNote};

    #[test]
    fn pair_rows_cover_every_note() {
        let r = Score::new(vec![Measure::new(96, vec![ScoreNote::new(60, 0, 24), ScoreNote::new(62, 24, 24), ScoreNote::new(64, 48, 24)])]);
        let p = Score::new(vec![Measure::new(96, vec![ScoreNote::new(60, 0, 24), ScoreNote::new(65, 24, 24), ScoreNote::new(64, 48, 24)])]);
        let piece = evaluate("x".into(), &r, &p);
        let status: Vec<&str> = piece.rows.iter().map(|r| r.status).collect();
        assert_eq!(status, vec!["match", "miss", "extra", "match"]);
    }
}
