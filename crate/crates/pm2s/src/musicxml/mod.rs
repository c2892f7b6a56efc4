//! The MusicXML subset covered by the score model: one partwise piano part
//! with divisions, time and staves attributes, notes, backup and forward.

mod parse;
mod write;

pub use parse::{parse_musicxml, AnacrusisMode, MusicXmlError, ParseOptions, ParseReport};
pub use write::{write_musicxml, WriteReport};
