use std::path::PathBuf;

use pm2s_core::align::AlignError;
use pm2s_core::augment::AugmentError;
use pm2s_core::tokenizer::TokenizeError;

use crate::beats::BeatsError;
use crate::midi::MidiError;
use crate::musicxml::MusicXmlError;
use crate::tokens::TokenFileError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Midi { path: PathBuf, source: MidiError },
    #[error("{}: {source}", path.display())]
    MusicXml { path: PathBuf, source: MusicXmlError },
    #[error("{}: {source}", path.display())]
    Tokens { path: PathBuf, source: TokenFileError },
    #[error("{}: {source}", path.display())]
    Beats { path: PathBuf, source: BeatsError },
    #[error("{}: {source}", path.display())]
    Tokenize { path: PathBuf, source: TokenizeError },
    #[error("{}: {source}", path.display())]
    Align { path: PathBuf, source: AlignError },
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// 1 for bad input or arguments, 2 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
