//! File formats and command-line front-end for the `pm2s-core` toolkit:
//! Standard MIDI Files, a MusicXML subset, JSON token files, beat
//! annotations and run manifests.

pub mod beats;
pub mod cli;
pub mod error;
pub mod manifest;
pub mod midi;
pub mod musicxml;
pub mod tokens;

pub use error::{Error, Result};
