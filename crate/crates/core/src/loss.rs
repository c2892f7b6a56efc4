//! Masked multi-stream cross-entropy over predicted distributions.

use alloc::vec::Vec;

use crate::tokenizer::{OutputFrame, OutputStream, OUTPUT_STREAMS, OUTPUT_VOCAB};

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("stream {stream}: expected {expected} probabilities, got {got}")]
    Length { stream: &'static str, expected: usize, got: usize },
    #[error("stream {stream}: probability {value} at index {index} outside [0, 1]")]
    Range { stream: &'static str, index: usize, value: f64 },
    #[error("stream {stream}: probabilities sum to {sum}")]
    Sum { stream: &'static str, sum: f64 },
}

/// One distribution per output stream, in stream order, with the space
/// stream last.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionFrame {
    dists: [Vec<f64>; OUTPUT_STREAMS],
}

impl PredictionFrame {
    pub fn new(dists: [Vec<f64>; OUTPUT_STREAMS]) -> Result<Self, LossError> {
        for (stream, d) in OutputStream::ALL.iter().zip(&dists) {
            let stream_name = stream.name();
            let expected = stream.vocab() as usize;
            if d.len() != expected {
                return Err(LossError::Length { stream: stream_name, expected, got: d.len() });
            }
            if let Some((index, &value)) = d.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
                return Err(LossError::Range { stream: stream_name, index, value });
            }
            let sum: f64 = d.iter().sum();
            if libm::fabs(sum - 1.0) > SUM_TOLERANCE {
                return Err(LossError::Sum { stream: stream_name, sum });
            }
        }
        Ok(Self { dists })
    }

    pub fn uniform() -> Self {
        Self { dists: OUTPUT_VOCAB.map(|v| alloc::vec![1.0 / v as f64; v as usize]) }
    }

    /// All mass on the target's tokens.
    pub fn one_hot(target: &OutputFrame) -> Self {
        let tokens = target.tokens();
        let mut i = 0;
        Self {
            dists: OUTPUT_VOCAB.map(|v| {
                let mut d = alloc::vec![0.0; v as usize];
                d[tokens[i] as usize] = 1.0;
                i += 1;
                d
            }),
        }
    }

    pub fn stream(&self, s: OutputStream) -> &[f64] {
        &self.dists[s as usize]
    }
}

/// `-ln q[k]`; infinite when `q[k]` is zero.
pub fn cross_entropy(q: &[f64], k: usize) -> f64 {
    let p = q[k];
    if p <= 0.0 {
        f64::INFINITY
    } else {
        -libm::log(p)
    }
}

/// Loss of one timestep. Space frames are scored on the space stream alone;
/// other frames on all streams with the space target 0.
pub fn timestep_loss(pred: &PredictionFrame, target: &OutputFrame) -> f64 {
    let sp = OUTPUT_STREAMS - 1;
    if target.space {
        return cross_entropy(&pred.dists[sp], 1);
    }
    let tokens = target.tokens();
    let streams: f64 = (0..sp).map(|i| cross_entropy(&pred.dists[i], tokens[i] as usize)).sum();
    streams + cross_entropy(&pred.dists[sp], 0)
}

pub fn sequence_loss<'a>(frames: impl IntoIterator<Item = (&'a PredictionFrame, &'a OutputFrame)>) -> f64 {
    frames.into_iter().map(|(p, t)| timestep_loss(p, t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::ScoreNote;
    use alloc::vec;

    fn note_frame() -> OutputFrame {
        OutputFrame::from_note(&ScoreNote::new(60, 0, 24), 0, 24, Some(0))
    }

    #[test]
    fn space_frame_half() {
        let mut p = PredictionFrame::uniform();
        p.dists[OUTPUT_STREAMS - 1] = vec![0.5, 0.5];
        let l = timestep_loss(&p, &OutputFrame::space());
        assert!((l - 0.5f64.ln().abs()).abs() < 1e-12);
    }

    #[test]
    fn one_hot_is_zero() {
        let t = note_frame();
        assert_eq!(timestep_loss(&PredictionFrame::one_hot(&t), &t), 0.0);
    }

    #[test]
    fn zero_probability_is_infinite() {
        let t = note_frame();
        let mut p = PredictionFrame::one_hot(&t);
        p.dists[0] = vec![0.0; 128];
        p.dists[0][61] = 1.0;
        assert_eq!(timestep_loss(&p, &t), f64::INFINITY);
    }

    #[test]
    fn validation() {
        let mut d = PredictionFrame::uniform().dists;
        d[3] = vec![1.0];
        assert!(matches!(PredictionFrame::new(d), Err(LossError::Length { expected: 146, .. })));
        let mut d = PredictionFrame::uniform().dists;
        d[4] = vec![0.7, 0.7];
        assert!(matches!(PredictionFrame::new(d), Err(LossError::Sum { .. })));
        let mut d = PredictionFrame::uniform().dists;
        d[4] = vec![1.5, -0.5];
        assert!(matches!(PredictionFrame::new(d), Err(LossError::Range { index: 0, .. })));
        assert!(PredictionFrame::new(PredictionFrame::uniform().dists).is_ok());
    }

    #[test]
    fn empty_sequence() {
        assert_eq!(sequence_loss(core::iter::empty()), 0.0);
    }
}
