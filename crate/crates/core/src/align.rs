//! Beat-level alignment of performance and score for training pairs, and
//! windowed chunking for long sequences.

use alloc::vec;
use alloc::vec::Vec;

use crate::perf::{Performance, PerformanceNote};
use crate::reconstruct::infer_time_signature;
use crate::score::{Score, Tick, TICKS_PER_QUARTER};
use crate::tokenizer::{
    encode_performance_frames, encode_score, InputFrame, InputSequence, OutputFrame, OutputSequence, QuantGrid,
    TokenizeError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlignError {
    #[error("beat list is empty")]
    NoBeats,
    #[error("beat times must be finite and strictly increasing (index {0})")]
    UnorderedBeats(usize),
    #[error("window {window} must exceed overlap {overlap}")]
    InvalidWindow { window: usize, overlap: usize },
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

/// Annotated beat times in seconds, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeatAnnotations {
    times: Vec<f64>,
}

impl BeatAnnotations {
    pub fn new(times: Vec<f64>) -> Result<Self, AlignError> {
        if times.is_empty() {
            return Err(AlignError::NoBeats);
        }
        for (i, t) in times.iter().enumerate() {
            if !t.is_finite() || (i > 0 && *t <= times[i - 1]) {
                return Err(AlignError::UnorderedBeats(i));
            }
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Assigns each onset to a half-open inter-beat interval.
///
/// With `B` beats there are `B` intervals: interval `k < B - 1` spans
/// `[beat_k, beat_{k+1})`, and the final interval holds everything from the
/// last beat on. Onsets before the first beat go to interval 0.
pub fn partition_by_beats<T: PartialOrd + Copy>(onsets: &[T], beats: &[T]) -> Vec<usize> {
    onsets
        .iter()
        .map(|o| beats.partition_point(|b| *b <= *o).saturating_sub(1))
        .collect()
}

/// Beat positions of a score in absolute ticks, derived per measure from
/// its inferred time signature. Compound meters beat in dotted units;
/// measures without a signature beat in quarters.
pub fn score_beat_positions(score: &Score) -> Vec<Tick> {
    let mut beats = Vec::new();
    for (start, m) in score.measure_starts().into_iter().zip(&score.measures) {
        let unit = match infer_time_signature(m.length) {
            Some((num, den)) => {
                let base = 4 * TICKS_PER_QUARTER / den;
                if num % 3 == 0 && num > 3 && den >= 8 {
                    3 * base
                } else {
                    base
                }
            }
            None => TICKS_PER_QUARTER,
        };
        let mut t = 0;
        while t < m.length {
            beats.push(start + t);
            t += unit;
        }
    }
    beats
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    /// Maximum distance in seconds from a beat for a note to be movable.
    pub window: f64,
    pub max_passes: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { window: 0.05, max_passes: 64 }
    }
}

/// Per-interval pitch histograms of performance minus score.
struct PitchBalance {
    diff: Vec<[i32; 128]>,
}

impl PitchBalance {
    fn new(intervals: usize, perf: &[(u8, usize)], score: &[(u8, usize)]) -> Self {
        let mut diff = vec![[0i32; 128]; intervals];
        for &(p, k) in perf {
            diff[k][p as usize & 127] += 1;
        }
        for &(p, k) in score {
            diff[k][p as usize & 127] -= 1;
        }
        Self { diff }
    }

    fn mismatches(&self) -> usize {
        self.diff.iter().flat_map(|h| h.iter()).map(|d| d.unsigned_abs() as usize).sum()
    }

    /// A move from `from` to `to` strictly lowers the mismatch count of both
    /// intervals exactly when `from` has a surplus and `to` a deficit of the pitch.
    fn improves_both(&self, pitch: u8, from: usize, to: usize) -> bool {
        let p = pitch as usize & 127;
        self.diff[from][p] > 0 && self.diff[to][p] < 0
    }

    fn apply(&mut self, pitch: u8, from: usize, to: usize) {
        let p = pitch as usize & 127;
        self.diff[from][p] -= 1;
        self.diff[to][p] += 1;
    }
}

/// Number of unmatched pitches summed over all intervals: for each interval
/// the size of the multiset symmetric difference of performance and score
/// pitches.
pub fn mismatch_count(intervals: usize, perf: &[(u8, usize)], score: &[(u8, usize)]) -> usize {
    PitchBalance::new(intervals, perf, score).mismatches()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub assignment: Vec<usize>,
    pub moves: usize,
    pub passes: usize,
}

/// The interval a note could move to, if it lies within `window` seconds of
/// the boundary beat shared with that interval. Nearer boundary first.
pub fn candidate_moves(onset: f64, interval: usize, beats: &[f64], window: f64) -> Vec<usize> {
    let mut c: Vec<(f64, usize)> = Vec::with_capacity(2);
    if interval > 0 {
        let d = libm::fabs(onset - beats[interval]);
        if d <= window {
            c.push((d, interval - 1));
        }
    }
    if interval + 1 < beats.len() {
        let d = libm::fabs(onset - beats[interval + 1]);
        if d <= window {
            c.push((d, interval + 1));
        }
    }
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    c.into_iter().map(|(_, k)| k).collect()
}

/// Greedy pitch-mismatch refinement of the performance interval assignment.
///
/// `perf` holds (pitch, onset) in onset order with its initial `assignment`;
/// `score` holds (pitch, interval) for every score note. Notes within the
/// window of a neighbouring beat are moved when the move strictly lowers
/// the mismatch count of both affected intervals. A note moved in a pass is
/// not reconsidered until the next pass; passes repeat until none moves a
/// note or `max_passes` is reached.
pub fn greedy_refine(
    perf: &[(u8, f64)],
    assignment: &[usize],
    score: &[(u8, usize)],
    beats: &BeatAnnotations,
    cfg: &RefineConfig,
) -> Refinement {
    let intervals = beats.len();
    let mut assignment = assignment.to_vec();
    let tagged: Vec<(u8, usize)> = perf.iter().zip(&assignment).map(|(&(p, _), &k)| (p, k)).collect();
    let mut balance = PitchBalance::new(intervals, &tagged, score);
    let mut moves = 0;
    let mut passes = 0;
    while passes < cfg.max_passes {
        passes += 1;
        let mut moved_any = false;
        let mut moved = vec![false; perf.len()];
        for (i, &(pitch, onset)) in perf.iter().enumerate() {
            if moved[i] {
                continue;
            }
            let from = assignment[i];
            let target = candidate_moves(onset, from, beats.times(), cfg.window)
                .into_iter()
                .find(|&to| balance.improves_both(pitch, from, to));
            if let Some(to) = target {
                balance.apply(pitch, from, to);
                assignment[i] = to;
                moved[i] = true;
                moved_any = true;
                moves += 1;
            }
        }
        if !moved_any {
            break;
        }
    }
    Refinement { assignment, moves, passes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignReport {
    pub intervals: usize,
    pub moves: usize,
    pub mismatch_before: usize,
    pub mismatch_after: usize,
    pub input_padding: usize,
    pub output_padding: usize,
    /// Beats dropped because the annotation and score beat counts differ.
    pub beats_truncated: usize,
}

/// Equal-length input and output frames for one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub input: InputSequence,
    pub output: OutputSequence,
    /// Frames per inter-beat interval (identical on both sides).
    pub interval_lengths: Vec<usize>,
    pub report: AlignReport,
}

/// Builds a training pair by sorting both sides into inter-beat intervals.
///
/// `beats[k]` is the performance time of score beat `score_beats[k]`. Each
/// interval emits its performance frames and its score frames; the shorter
/// side is padded at the end of the interval, the output with space frames
/// and the input with padding frames.
pub fn build_training_pair(
    perf: &Performance,
    score: &Score,
    beats: &BeatAnnotations,
    score_beats: &[Tick],
    grid: &QuantGrid,
    cfg: &RefineConfig,
) -> Result<AlignedPair, AlignError> {
    let n = beats.len().min(score_beats.len());
    if n == 0 {
        return Err(AlignError::NoBeats);
    }
    let mut report = AlignReport {
        intervals: n,
        beats_truncated: beats.len().max(score_beats.len()) - n,
        ..AlignReport::default()
    };
    let beats = BeatAnnotations::new(beats.times()[..n].to_vec())?;
    let score_beats = &score_beats[..n];

    let output = encode_score(score)?;
    let flat = score.flat_notes();
    let score_onsets: Vec<Tick> = flat.iter().map(|(t, _)| *t).collect();
    let score_assign = partition_by_beats(&score_onsets, score_beats);
    let score_tagged: Vec<(u8, usize)> = flat.iter().zip(&score_assign).map(|((_, n), &k)| (n.pitch, k)).collect();

    let notes = perf.notes();
    let onsets: Vec<f64> = notes.iter().map(|n| n.onset).collect();
    let initial = partition_by_beats(&onsets, beats.times());
    let pairs: Vec<(u8, f64)> = notes.iter().map(|n| (n.pitch, n.onset)).collect();
    let initial_tagged: Vec<(u8, usize)> = notes.iter().zip(&initial).map(|(n, &k)| (n.pitch, k)).collect();
    report.mismatch_before = mismatch_count(n, &initial_tagged, &score_tagged);
    let refined = greedy_refine(&pairs, &initial, &score_tagged, &beats, cfg);
    report.moves = refined.moves;
    let refined_tagged: Vec<(u8, usize)> = notes.iter().zip(&refined.assignment).map(|(n, &k)| (n.pitch, k)).collect();
    report.mismatch_after = mismatch_count(n, &refined_tagged, &score_tagged);

    let mut perf_by_interval: Vec<Vec<PerformanceNote>> = vec![Vec::new(); n];
    for (note, &k) in notes.iter().zip(&refined.assignment) {
        perf_by_interval[k].push(*note);
    }
    let mut score_by_interval: Vec<Vec<OutputFrame>> = vec![Vec::new(); n];
    for (frame, &k) in output.frames.iter().zip(&score_assign) {
        score_by_interval[k].push(*frame);
    }

    let emitted: Vec<PerformanceNote> = perf_by_interval.iter().flatten().copied().collect();
    let mut encoded = encode_performance_frames(&emitted, grid)?.into_iter();

    let mut input = Vec::new();
    let mut out = Vec::new();
    let mut interval_lengths = Vec::with_capacity(n);
    for (p, s) in perf_by_interval.iter().zip(&score_by_interval) {
        let len = p.len().max(s.len());
        input.extend(encoded.by_ref().take(p.len()));
        input.extend(core::iter::repeat_n(InputFrame::padding(), len - p.len()));
        out.extend_from_slice(s);
        out.extend(core::iter::repeat_n(OutputFrame::space(), len - s.len()));
        report.input_padding += len - p.len();
        report.output_padding += len - s.len();
        interval_lengths.push(len);
    }
    Ok(AlignedPair { input: InputSequence::new(input), output: OutputSequence::new(out), interval_lengths, report })
}

/// A window of frames starting at `start` in the original sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Chunk<T> {
    pub start: usize,
    pub frames: Vec<T>,
}

/// Splits `frames` into windows starting at multiples of `window - overlap`.
/// The last window ends at the end of the sequence.
pub fn chunk<T: Clone>(frames: &[T], window: usize, overlap: usize) -> Result<Vec<Chunk<T>>, AlignError> {
    if window <= overlap {
        return Err(AlignError::InvalidWindow { window, overlap });
    }
    let stride = window - overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < frames.len() {
        let end = (start + window).min(frames.len());
        chunks.push(Chunk { start, frames: frames[start..end].to_vec() });
        if end == frames.len() {
            break;
        }
        start += stride;
    }
    Ok(chunks)
}

/// Joins chunk outputs; in each overlap the earlier chunk is kept up to
/// the overlap midpoint and the later chunk from there on.
pub fn stitch<T: Clone>(chunks: &[Chunk<T>]) -> Vec<T> {
    let mut out = Vec::new();
    for (i, c) in chunks.iter().enumerate() {
        let end = c.start + c.frames.len();
        let lo = out.len().max(c.start);
        let hi = match chunks.get(i + 1) {
            Some(next) if next.start < end => next.start + (end - next.start) / 2,
            Some(next) => next.start.min(end),
            None => end,
        };
        if hi > lo {
            out.extend_from_slice(&c.frames[lo - c.start..hi - c.start]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{Measure, ScoreNote};

    fn beats(t: &[f64]) -> BeatAnnotations {
        BeatAnnotations::new(t.to_vec()).unwrap()
    }

    #[test]
    fn partition_rules() {
        let b = [0.0, 1.0, 2.0];
        assert_eq!(partition_by_beats(&[0.5], &b), vec![0]);
        assert_eq!(partition_by_beats(&[1.0], &b), vec![1]);
        assert_eq!(partition_by_beats(&[5.0], &b), vec![2]);
        assert_eq!(partition_by_beats(&[-0.3], &[0.5, 1.0]), vec![0]);
    }

    #[test]
    fn beat_validation() {
        assert_eq!(BeatAnnotations::new(vec![]), Err(AlignError::NoBeats));
        assert_eq!(BeatAnnotations::new(vec![0.0, 1.0, 1.0]), Err(AlignError::UnorderedBeats(2)));
    }

    #[test]
    fn early_note_moves_into_next_interval() {
        let b = beats(&[0.0, 1.0, 2.0]);
        let perf = [(60u8, 0.97)];
        let init = partition_by_beats(&[0.97], b.times());
        assert_eq!(init, vec![0]);
        let score = [(60u8, 1usize)];
        assert_eq!(mismatch_count(3, &[(60, 0)], &score), 2);
        let r = greedy_refine(&perf, &init, &score, &b, &RefineConfig::default());
        assert_eq!(r.assignment, vec![1]);
        assert_eq!(mismatch_count(3, &[(60, 1)], &score), 0);
    }

    #[test]
    fn note_outside_window_never_moves() {
        let b = beats(&[0.0, 1.0, 2.0]);
        let r = greedy_refine(&[(60, 0.93)], &[0], &[(60, 1)], &b, &RefineConfig::default());
        assert_eq!(r.assignment, vec![0]);
        assert_eq!(r.moves, 0);
    }

    #[test]
    fn one_sided_improvement_is_rejected() {
        // moving 60 out of interval 0 fixes interval 0 but interval 1 already has its 60
        let b = beats(&[0.0, 1.0, 2.0]);
        let perf = [(60u8, 0.98), (60u8, 1.2)];
        let score = [(60u8, 1usize)];
        let r = greedy_refine(&perf, &[0, 1], &score, &b, &RefineConfig::default());
        assert_eq!(r.assignment, vec![0, 1]);
    }

    #[test]
    fn late_note_moves_back() {
        let b = beats(&[0.0, 1.0, 2.0]);
        let r = greedy_refine(&[(62, 1.03)], &[1], &[(62, 0)], &b, &RefineConfig::default());
        assert_eq!(r.assignment, vec![0]);
    }

    fn toy_score(pitches: &[&[u8]]) -> Score {
        // one 4/4 measure per entry, one quarter per pitch
        Score::new(
            pitches
                .iter()
                .map(|ps| Measure::new(96, ps.iter().enumerate().map(|(i, &p)| ScoreNote::new(p, 24 * i as u32, 24)).collect()))
                .collect(),
        )
    }

    #[test]
    fn matched_pair_has_no_padding() {
        let score = toy_score(&[&[60, 62, 64, 65]]);
        let perf = Performance::new((0..4).map(|i| PerformanceNote::new([60, 62, 64, 65][i], 0.5 * i as f64, 0.4, 70).unwrap()).collect());
        let b = beats(&[0.0, 0.5, 1.0, 1.5]);
        let pair = build_training_pair(&perf, &score, &b, &score_beat_positions(&score), &QuantGrid::default(), &RefineConfig::default()).unwrap();
        assert_eq!(pair.input.len(), 4);
        assert_eq!(pair.output.len(), 4);
        assert_eq!(pair.report.input_padding + pair.report.output_padding, 0);
    }

    #[test]
    fn surplus_performance_notes_pad_output() {
        // beat 0 has one score note against three performed notes
        let score = toy_score(&[&[60, 62]]);
        let perf = Performance::new(vec![
            PerformanceNote::new(60, 0.0, 0.1, 70).unwrap(),
            PerformanceNote::new(61, 0.1, 0.1, 70).unwrap(),
            PerformanceNote::new(60, 0.2, 0.1, 70).unwrap(),
            PerformanceNote::new(62, 0.5, 0.4, 70).unwrap(),
        ]);
        let b = beats(&[0.0, 0.5]);
        let sb = [0, 24];
        let pair = build_training_pair(&perf, &score, &b, &sb, &QuantGrid::default(), &RefineConfig::default()).unwrap();
        assert_eq!(pair.interval_lengths, vec![3, 1]);
        assert_eq!(pair.output.space_count(), 2);
        assert!(pair.output.frames[1].space && pair.output.frames[2].space);
        assert_eq!(pair.input.len(), pair.output.len());
    }

    #[test]
    fn trill_interval_gets_four_spaces() {
        let mut trill = ScoreNote::new(72, 0, 24);
        trill.trill = true;
        let score = Score::new(vec![Measure::new(24, vec![trill])]);
        let perf = Performance::new((0..5).map(|i| PerformanceNote::new(if i % 2 == 0 { 72 } else { 74 }, 0.08 * i as f64, 0.07, 60).unwrap()).collect());
        let pair = build_training_pair(&perf, &score, &beats(&[0.0]), &[0], &QuantGrid::default(), &RefineConfig::default()).unwrap();
        assert_eq!(pair.output.space_count(), 4);
        assert_eq!(pair.output.len(), 5);
    }

    #[test]
    fn input_padding_frames_for_missing_notes() {
        let score = toy_score(&[&[60, 62]]);
        let perf = Performance::new(vec![PerformanceNote::new(62, 0.5, 0.4, 70).unwrap()]);
        let pair = build_training_pair(&perf, &score, &beats(&[0.0, 0.5]), &[0, 24], &QuantGrid::default(), &RefineConfig::default()).unwrap();
        assert!(pair.input.frames[0].pad);
        assert_eq!(pair.report.input_padding, 1);
    }

    #[test]
    fn empty_beats_error() {
        let score = toy_score(&[&[60]]);
        let r = build_training_pair(&Performance::default(), &score, &beats(&[0.0]), &[], &QuantGrid::default(), &RefineConfig::default());
        assert_eq!(r, Err(AlignError::NoBeats));
    }

    #[test]
    fn score_beats_follow_meter() {
        let s = Score::new(vec![Measure::new(96, vec![]), Measure::new(108, vec![]), Measure::new(84, vec![])]);
        let b = score_beat_positions(&s);
        // 4/4: quarters; 9/8: dotted quarters; 7/8: eighths
        assert_eq!(&b[..4], &[0, 24, 48, 72]);
        assert_eq!(&b[4..7], &[96, 132, 168]);
        assert_eq!(&b[7..9], &[204, 216]);
        assert_eq!(b.len(), 4 + 3 + 7);
    }

    #[test]
    fn chunk_offsets() {
        let v: Vec<usize> = (0..600).collect();
        let c = chunk(&v, 512, 64).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].start, c[0].frames.len()), (0, 512));
        assert_eq!((c[1].start, c[1].frames.len()), (448, 152));
        assert_eq!(chunk(&v[..512], 512, 64).unwrap().len(), 1);
        assert_eq!(stitch(&c), v);
        assert!(chunk(&v, 64, 64).is_err());
    }

    #[test]
    fn stitch_hands_off_at_midpoint() {
        let v: Vec<i32> = (0..600).collect();
        let mut c = chunk(&v, 512, 64).unwrap();
        for f in &mut c[1].frames {
            *f = -*f;
        }
        let s = stitch(&c);
        assert_eq!(s.len(), 600);
        assert_eq!(s[479], 479);
        assert_eq!(s[480], -480);
    }
}
