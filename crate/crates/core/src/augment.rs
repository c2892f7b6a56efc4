//! Seeded training-time augmentations of (performance, score) pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::perf::Performance;
use crate::score::Score;
use crate::spelling::transpose_accidental;

pub const MAX_TRANSPOSE: i32 = 12;
pub const TEMPO_RANGE: (f64, f64) = (0.8, 1.2);
pub const DURATION_SPREAD: f64 = 0.05;
pub const ONSET_SIGMA: f64 = 0.05;
/// Interval factors are clamped to this range so onsets never reorder.
pub const ONSET_FACTOR_CLAMP: (f64, f64) = (0.5, 1.5);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error("transposition {0} outside [-12, 12]")]
    Transpose(i32),
    #[error("tempo factor {0} must be positive and finite")]
    Tempo(f64),
    #[error("noise width {0} must be in [0, 0.5]")]
    Noise(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentConfig {
    pub transpose_semitones: i32,
    pub tempo_lambda: f64,
    /// Half-width of the uniform per-note duration factor around 1.
    pub duration_noise: f64,
    /// Standard deviation of the normal per-interval onset factor around 1.
    pub onset_noise: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { transpose_semitones: 0, tempo_lambda: 1.0, duration_noise: DURATION_SPREAD, onset_noise: ONSET_SIGMA, seed: 0 }
    }
}

impl AugmentConfig {
    /// Draws a transposition in [-12, 12] and a tempo factor in [0.8, 1.2].
    pub fn sample(seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        Self {
            transpose_semitones: rng.random_range(-MAX_TRANSPOSE..=MAX_TRANSPOSE),
            tempo_lambda: rng.random_range(TEMPO_RANGE.0..=TEMPO_RANGE.1),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.transpose_semitones.abs() > MAX_TRANSPOSE {
            return Err(AugmentError::Transpose(self.transpose_semitones));
        }
        check_tempo(self.tempo_lambda)?;
        check_noise(self.duration_noise)?;
        check_noise(self.onset_noise)
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_tempo(lambda: f64) -> Result<(), AugmentError> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(AugmentError::Tempo(lambda))
    }
}

fn check_noise(w: f64) -> Result<(), AugmentError> {
    if (0.0..=0.5).contains(&w) {
        Ok(())
    } else {
        Err(AugmentError::Noise(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentReport {
    /// Notes moved back an octave to stay within the MIDI range.
    pub octave_folds: usize,
    /// Score notes whose spelling left the double-accidental range.
    pub spelling_fallbacks: usize,
}

fn shift_pitch(pitch: u8, k: i32) -> (u8, bool) {
    let p = pitch as i32 + k;
    if p > 127 {
        ((p - 12) as u8, true)
    } else if p < 0 {
        ((p + 12) as u8, true)
    } else {
        (p as u8, false)
    }
}

/// Shifts every pitch by `k` semitones. Pitches that would leave the MIDI
/// range are folded inward by an octave; displayed accidentals are respelled
/// along the line of fifths.
pub fn transpose(perf: &Performance, score: &Score, k: i32) -> Result<(Performance, Score, AugmentReport), AugmentError> {
    if k.abs() > MAX_TRANSPOSE {
        return Err(AugmentError::Transpose(k));
    }
    let mut report = AugmentReport::default();
    let perf = perf.map_notes(|n| {
        let (pitch, folded) = shift_pitch(n.pitch, k);
        report.octave_folds += folded as usize;
        crate::perf::PerformanceNote { pitch, ..*n }
    });
    let mut score = score.clone();
    for n in score.measures.iter_mut().flat_map(|m| m.notes.iter_mut()) {
        let (pitch, folded) = shift_pitch(n.pitch, k);
        report.octave_folds += folded as usize;
        let (acc, fallback) = transpose_accidental(n.pitch, n.accidental, k, pitch);
        report.spelling_fallbacks += fallback as usize;
        n.pitch = pitch;
        n.accidental = acc;
    }
    score.sort();
    Ok((perf, score, report))
}

/// Multiplies onsets and durations by `lambda`.
pub fn tempo_scale(perf: &Performance, lambda: f64) -> Result<Performance, AugmentError> {
    check_tempo(lambda)?;
    Ok(perf.map_notes(|n| crate::perf::PerformanceNote { onset: n.onset * lambda, duration: n.duration * lambda, ..*n }))
}

/// Scales each duration by an independent factor uniform in
/// `[1 - spread, 1 + spread]`.
pub fn duration_jitter<R: Rng + ?Sized>(perf: &Performance, spread: f64, rng: &mut R) -> Result<Performance, AugmentError> {
    check_noise(spread)?;
    Ok(perf.map_notes(|n| {
        let u: f64 = rng.random();
        crate::perf::PerformanceNote { duration: n.duration * (1.0 + spread * (2.0 * u - 1.0)), ..*n }
    }))
}

/// Scales every inter-onset interval by an independent factor drawn from
/// N(1, sigma²), clamped, and rebuilds onsets from the first one.
pub fn onset_jitter<R: Rng + ?Sized>(perf: &Performance, sigma: f64, rng: &mut R) -> Result<Performance, AugmentError> {
    check_noise(sigma)?;
    let normal = Normal::new(1.0, sigma).map_err(|_| AugmentError::Noise(sigma))?;
    let mut prev_in = None;
    let mut prev_out = 0.0;
    Ok(perf.map_notes(|n| {
        let onset = match prev_in {
            None => n.onset,
            Some(p) => {
                let f = normal.sample(rng).clamp(ONSET_FACTOR_CLAMP.0, ONSET_FACTOR_CLAMP.1);
                prev_out + (n.onset - p) * f
            }
        };
        prev_in = Some(n.onset);
        prev_out = onset;
        crate::perf::PerformanceNote { onset, ..*n }
    }))
}

/// Applies transposition, tempo scaling, duration and onset jitter in that
/// order with a generator seeded from `cfg.seed`.
pub fn augment(perf: &Performance, score: &Score, cfg: &AugmentConfig) -> Result<(Performance, Score, AugmentReport), AugmentError> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let (p, s, report) = transpose(perf, score, cfg.transpose_semitones)?;
    let p = tempo_scale(&p, cfg.tempo_lambda)?;
    let p = duration_jitter(&p, cfg.duration_noise, &mut rng)?;
    let p = onset_jitter(&p, cfg.onset_noise, &mut rng)?;
    Ok((p, s, report))
}
