//! Score reconstruction from output token frames.
//!
//! Decoding recovers measure structure from the measure-length tokens:
//! every frame with a measure length opens a new measure, whose absolute
//! start is the previous start plus that length. A measure's own length is
//! therefore only known once the next measure opens. Afterwards notes that
//! cross barlines are split into tied segments and voice gaps are filled
//! with rests.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::score::{Accidental, Measure, Rest, Score, ScoreNote, Staff, Tick, TICKS_PER_QUARTER};
use crate::tokenizer::OutputSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconstructionReport {
    pub notes_emitted: usize,
    pub ties_created: usize,
    pub rests_inserted: usize,
    pub spaces_skipped: usize,
    /// Notes whose onset fell outside their measure and were clamped or dropped.
    pub unrepresentable_events: usize,
    /// Same-voice notes starting inside another note's span.
    pub voice_overlaps: usize,
    /// The first note frame did not open a measure.
    pub implicit_first_measure: bool,
}

struct OpenMeasure {
    length: Option<Tick>,
    notes: Vec<ScoreNote>,
}

/// Rebuilds measures and notes from output frames. Space frames are skipped.
pub fn decode_score(seq: &OutputSequence) -> (Score, ReconstructionReport) {
    let mut report = ReconstructionReport::default();
    let mut open: Vec<OpenMeasure> = Vec::new();
    for f in &seq.frames {
        if f.space {
            report.spaces_skipped += 1;
            continue;
        }
        match f.measure_length {
            Some(prev_len) => {
                if let Some(last) = open.last_mut() {
                    last.length = Some(prev_len as Tick);
                }
                open.push(OpenMeasure { length: None, notes: Vec::new() });
            }
            None if open.is_empty() => {
                report.implicit_first_measure = true;
                open.push(OpenMeasure { length: None, notes: Vec::new() });
            }
            None => {}
        }
        open.last_mut().expect("a measure is open").notes.push(f.to_note());
    }

    let mut measures = Vec::with_capacity(open.len());
    let mut prev_length = None;
    for m in open {
        let length = m.length.unwrap_or_else(|| final_length(&m.notes, prev_length));
        let mut notes = Vec::with_capacity(m.notes.len());
        for mut n in m.notes {
            let limit = if n.grace { length } else { length.saturating_sub(1) };
            if n.onset > limit || (length == 0 && !n.grace) {
                report.unrepresentable_events += 1;
                if length == 0 {
                    continue;
                }
                n.onset = limit;
            }
            notes.push(n);
        }
        report.notes_emitted += notes.len();
        measures.push(Measure::new(length, notes));
        prev_length = Some(length);
    }
    (Score::new(measures), report)
}

/// Length of the last measure: the preceding measure's length when the
/// notes fit inside it, otherwise the notes' extent.
fn final_length(notes: &[ScoreNote], prev_length: Option<Tick>) -> Tick {
    let extent = notes
        .iter()
        .map(|n| if n.grace { n.onset } else { n.onset + n.duration.max(1) })
        .max()
        .unwrap_or(0);
    match prev_length {
        Some(p) if extent <= p => p,
        _ => extent,
    }
}

/// Splits every note that runs past its barline into tied segments, adding
/// measures at the end when a note outlasts the score.
pub fn split_and_tie(score: &Score, report: &mut ReconstructionReport) -> Score {
    let mut out: Vec<Measure> = score
        .measures
        .iter()
        .map(|m| Measure { length: m.length, notes: Vec::new(), rests: m.rests.clone() })
        .collect();
    for (i, m) in score.measures.iter().enumerate() {
        for n in &m.notes {
            if n.grace || n.end() <= m.length || n.onset >= m.length {
                out[i].notes.push(*n);
                continue;
            }
            let mut remaining = n.duration;
            let mut onset = n.onset;
            let mut j = i;
            let mut first = true;
            while remaining > 0 {
                if j == out.len() {
                    let last = out.last().map_or(0, |m| m.length);
                    out.push(Measure { length: if last > 0 { last } else { remaining }, ..Measure::default() });
                }
                let len = out[j].length;
                if len > onset {
                    let seg = remaining.min(len - onset);
                    remaining -= seg;
                    let mut piece = *n;
                    piece.onset = onset;
                    piece.duration = seg;
                    if first {
                        piece.tie_start = remaining > 0 || n.tie_start;
                    } else {
                        piece.accidental = Accidental::None;
                        piece.trill = false;
                        piece.staccato = false;
                        piece.tie_stop = true;
                        piece.tie_start = remaining > 0 || n.tie_start;
                        report.ties_created += 1;
                    }
                    out[j].notes.push(piece);
                    first = false;
                }
                j += 1;
                onset = 0;
            }
        }
    }
    Score::new(out)
}

/// Fills gaps in every (staff, voice) that has notes in a measure with
/// rests, so that notes and rests cover the measure from 0 to its length.
/// Grace notes are ignored. Existing rests are replaced.
pub fn fill_rests(score: &Score, report: &mut ReconstructionReport) -> Score {
    let mut out = score.clone();
    for m in &mut out.measures {
        m.rests.clear();
        let mut voices: BTreeMap<(Staff, u8), Vec<(Tick, Tick)>> = BTreeMap::new();
        for n in m.notes.iter().filter(|n| !n.grace && n.duration > 0) {
            voices.entry((n.staff, n.voice)).or_default().push((n.onset, n.end().min(m.length)));
        }
        for ((staff, voice), mut spans) in voices {
            spans.sort_unstable();
            let mut cursor = 0;
            let mut last_onset = None;
            for (on, end) in spans {
                if on > cursor {
                    m.rests.push(Rest { onset: cursor, duration: on - cursor, staff, voice });
                } else if on < cursor && last_onset != Some(on) {
                    report.voice_overlaps += 1;
                }
                last_onset = Some(on);
                cursor = cursor.max(end);
            }
            if cursor < m.length {
                m.rests.push(Rest { onset: cursor, duration: m.length - cursor, staff, voice });
            }
        }
        report.rests_inserted += m.rests.len();
        m.sort();
    }
    out
}

/// Time signature for a measure length, trying denominators 4, 8, 2, 16.
pub fn infer_time_signature(length: Tick) -> Option<(u32, u32)> {
    let whole = 4 * TICKS_PER_QUARTER;
    [4, 8, 2, 16].into_iter().find_map(|den| {
        let scaled = length * den;
        (scaled > 0 && scaled.is_multiple_of(whole)).then(|| (scaled / whole, den))
    })
}

/// Full pipeline: decode, tie across barlines, fill rests.
pub fn reconstruct(seq: &OutputSequence) -> (Score, ReconstructionReport) {
    let (score, mut report) = decode_score(seq);
    let tied = split_and_tie(&score, &mut report);
    let filled = fill_rests(&tied, &mut report);
    (filled, report)
}
