use alloc::vec::Vec;

use super::frames::{InputFrame, InputSequence, OutputFrame, OutputSequence};
use super::grid::{dequantize_velocity, quantize_velocity, QuantGrid};
use super::TokenizeError;
use crate::perf::{Performance, PerformanceNote};
use crate::score::{Score, MAX_DURATION_TICKS, MAX_MEASURE_TICKS};

pub fn encode_performance(perf: &Performance, grid: &QuantGrid) -> Result<InputSequence, TokenizeError> {
    Ok(InputSequence::new(encode_performance_frames(perf.notes(), grid)?))
}

/// Encodes notes in the given order. Delta onsets are taken from the
/// previous note in the slice (the first from t = 0); negative deltas,
/// which only arise from reordered notes, are clipped to zero.
pub fn encode_performance_frames(notes: &[PerformanceNote], grid: &QuantGrid) -> Result<Vec<InputFrame>, TokenizeError> {
    grid.validate()?;
    let mut prev = 0.0;
    notes
        .iter()
        .map(|n| {
            let delta = (n.onset - prev).max(0.0);
            prev = n.onset;
            Ok(InputFrame {
                pitch: n.pitch,
                onset: grid.quantize(delta)?,
                duration: grid.quantize(n.duration)?,
                velocity: quantize_velocity(n.velocity),
                conditioning: false,
                pad: false,
            })
        })
        .collect()
}

/// Inverse of [`encode_performance`] up to quantization. Padding frames are
/// skipped; velocities decode to bucket centers.
pub fn decode_performance(seq: &InputSequence, grid: &QuantGrid) -> Result<Performance, TokenizeError> {
    grid.validate()?;
    // token 0 would decode to a zero duration; use the middle of its bucket
    let shortest = grid.value_at(0.5) / 2.0;
    let mut onset = 0.0;
    let mut notes = Vec::with_capacity(seq.len());
    for f in seq.frames.iter().filter(|f| !f.pad) {
        onset += grid.dequantize(f.onset)?;
        let duration = if f.duration == 0 { shortest } else { grid.dequantize(f.duration)? };
        notes.push(PerformanceNote { pitch: f.pitch, onset, duration, velocity: dequantize_velocity(f.velocity) });
    }
    Ok(Performance::new(notes))
}

/// Counters for lossy steps taken while encoding a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncodeReport {
    /// Measures without notes; they have no frame to carry their length.
    pub empty_measures_dropped: usize,
    /// Durations above four quarters clipped to the top token.
    pub durations_clipped: usize,
}

pub fn encode_score(score: &Score) -> Result<OutputSequence, TokenizeError> {
    encode_score_report(score).map(|(seq, _)| seq)
}

/// Encodes a score into output frames in canonical order.
///
/// The first note of every measure carries the preceding measure's length
/// in `measure_length`; the very first measure carries 0.
pub fn encode_score_report(score: &Score) -> Result<(OutputSequence, EncodeReport), TokenizeError> {
    score.validate()?;
    let mut report = EncodeReport::default();
    let mut frames = Vec::with_capacity(score.note_count());
    let mut prev_length = 0u8;
    for (index, m) in score.measures.iter().enumerate() {
        if m.length > MAX_MEASURE_TICKS {
            return Err(TokenizeError::UnrepresentableMeasure { index, length: m.length });
        }
        if m.notes.is_empty() {
            report.empty_measures_dropped += 1;
            continue;
        }
        let mut notes = m.notes.clone();
        notes.sort_by(crate::score::ScoreNote::canonical_cmp);
        for (j, n) in notes.iter().enumerate() {
            let duration = if n.duration > MAX_DURATION_TICKS {
                report.durations_clipped += 1;
                MAX_DURATION_TICKS
            } else {
                n.duration
            };
            let ml = (j == 0).then_some(prev_length);
            frames.push(OutputFrame::from_note(n, n.onset.min(MAX_MEASURE_TICKS) as u8, duration as u8, ml));
        }
        prev_length = m.length as u8;
    }
    Ok((OutputSequence::new(frames), report))
}

/// Surrogate encoder input for scores without a performance: output
/// pitches are reused, timing and velocity are masked to zero and the
/// conditioning flag is set. Space frames become padding.
pub fn surrogate_input(output: &OutputSequence) -> InputSequence {
    InputSequence::new(
        output
            .frames
            .iter()
            .map(|f| {
                if f.space {
                    InputFrame::padding()
                } else {
                    InputFrame { pitch: f.pitch, conditioning: true, ..InputFrame::default() }
                }
            })
            .collect(),
    )
}
