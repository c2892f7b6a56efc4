//! Allocation-only core of the pm2s toolkit.
//!
//! Everything in this crate is a pure transformation over in-memory values:
//! performance and score models, the compound tokenizer, score
//! reconstruction from output tokens, beat-level training-pair alignment,
//! seeded augmentations, score-similarity metrics and the masked
//! multi-stream loss. File formats and the command-line front-end live in
//! the `pm2s` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod align;
pub mod augment;
pub mod loss;
pub mod metrics;
pub mod perf;
pub mod reconstruct;
pub mod score;
pub mod spelling;
pub mod tokenizer;

pub use perf::{Performance, PerformanceNote};
pub use score::{Accidental, Measure, Rest, Score, ScoreNote, Staff, Stem, Tick, TICKS_PER_QUARTER};
pub use tokenizer::{InputFrame, OutputFrame, QuantGrid, TokenSequences};
