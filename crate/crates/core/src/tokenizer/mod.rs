//! Compound tokenization of performances and scores.
//!
//! Every note occupies exactly one timestep holding one token per attribute
//! stream. Input (performance) frames carry pitch, log-quantized delta onset
//! and duration, a velocity bucket and a conditioning flag. Output (score)
//! frames carry the eleven notation attributes plus a space flag.

mod encode;
mod flat;
mod frames;
mod grid;

pub use encode::{
    decode_performance, encode_performance, encode_performance_frames, encode_score, encode_score_report,
    surrogate_input, EncodeReport,
};
pub use flat::{flatten_score, FlatToken};
pub use frames::{
    InputFrame, InputSequence, InputStream, OutputFrame, OutputSequence, OutputStream, TokenSequences, ML_FALSE,
    OUTPUT_STREAMS, OUTPUT_VOCAB,
};
pub use grid::{dequantize_velocity, log_dequantize, log_quantize, quantize_velocity, QuantGrid, VELOCITY_BUCKETS};

use crate::score::{ScoreError, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TokenizeError {
    #[error("negative or NaN time value")]
    NegativeTime,
    #[error("token {token} outside {stream} vocabulary of size {vocab}")]
    TokenOutOfRange { stream: &'static str, token: u8, vocab: u16 },
    #[error("invalid quantization grid")]
    InvalidGrid,
    #[error("measure {index} has length {length} ticks, beyond the 144-tick grid")]
    UnrepresentableMeasure { index: usize, length: Tick },
    #[error(transparent)]
    Score(#[from] ScoreError),
}
