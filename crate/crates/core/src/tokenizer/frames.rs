use alloc::vec::Vec;

use super::TokenizeError;
use crate::score::{Accidental, ScoreNote, Staff, Stem, Tick, MAX_VOICE};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Input streams in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputStream {
    Pitch,
    Onset,
    Duration,
    Velocity,
    Conditioning,
}

impl InputStream {
    pub const ALL: [InputStream; 5] =
        [Self::Pitch, Self::Onset, Self::Duration, Self::Velocity, Self::Conditioning];

    pub fn name(self) -> &'static str {
        ["pitch", "onset", "duration", "velocity", "conditioning"][self as usize]
    }

    /// Vocabulary size on the default grid.
    pub fn vocab(self) -> u16 {
        [128, 200, 200, 8, 2][self as usize]
    }
}

/// Output streams in file order; the last one is the space flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputStream {
    Pitch,
    Onset,
    Duration,
    MeasureLength,
    Staff,
    Voice,
    Trill,
    Staccato,
    Stem,
    Grace,
    Accidental,
    Space,
}

pub const OUTPUT_STREAMS: usize = 12;

/// Reserved measure-length token meaning "not the first note of a measure".
pub const ML_FALSE: u8 = 145;

impl OutputStream {
    pub const ALL: [OutputStream; OUTPUT_STREAMS] = [
        Self::Pitch,
        Self::Onset,
        Self::Duration,
        Self::MeasureLength,
        Self::Staff,
        Self::Voice,
        Self::Trill,
        Self::Staccato,
        Self::Stem,
        Self::Grace,
        Self::Accidental,
        Self::Space,
    ];

    pub fn name(self) -> &'static str {
        [
            "pitch",
            "onset",
            "duration",
            "measure_length",
            "staff",
            "voice",
            "trill",
            "staccato",
            "stem",
            "grace",
            "accidental",
            "space",
        ][self as usize]
    }

    pub fn vocab(self) -> u16 {
        OUTPUT_VOCAB[self as usize]
    }
}

pub const OUTPUT_VOCAB: [u16; OUTPUT_STREAMS] = [128, 145, 97, 146, 2, 8, 2, 2, 3, 2, 6, 2];

/// One performance timestep.
///
/// A padding frame (`pad = true`) carries all-zero tokens and stands for no
/// note; it only appears in aligned training pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct InputFrame {
    pub pitch: u8,
    pub onset: u8,
    pub duration: u8,
    pub velocity: u8,
    pub conditioning: bool,
    pub pad: bool,
}

impl InputFrame {
    pub fn padding() -> Self {
        Self { pad: true, ..Self::default() }
    }

    pub fn tokens(&self) -> [u8; 5] {
        [self.pitch, self.onset, self.duration, self.velocity, self.conditioning as u8]
    }

    pub fn from_tokens(t: [u8; 5], grid_buckets: u16) -> Result<Self, TokenizeError> {
        let vocab = [128, grid_buckets, grid_buckets, 8, 2];
        for (i, (&tok, &v)) in t.iter().zip(vocab.iter()).enumerate() {
            if tok as u16 >= v {
                return Err(TokenizeError::TokenOutOfRange { stream: InputStream::ALL[i].name(), token: tok, vocab: v });
            }
        }
        Ok(Self { pitch: t[0], onset: t[1], duration: t[2], velocity: t[3], conditioning: t[4] == 1, pad: false })
    }
}

/// One score timestep: either a note or a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct OutputFrame {
    pub pitch: u8,
    pub onset: u8,
    pub duration: u8,
    /// Length of the preceding measure on the first note of a measure.
    pub measure_length: Option<u8>,
    pub staff: Staff,
    /// Voice number in [1, 8].
    pub voice: u8,
    pub trill: bool,
    pub staccato: bool,
    pub stem: Stem,
    pub grace: bool,
    pub accidental: Accidental,
    pub space: bool,
}

impl OutputFrame {
    pub fn space() -> Self {
        Self {
            pitch: 0,
            onset: 0,
            duration: 0,
            measure_length: None,
            staff: Staff::Upper,
            voice: 1,
            trill: false,
            staccato: false,
            stem: Stem::Up,
            grace: false,
            accidental: Accidental::DoubleFlat,
            space: true,
        }
    }

    pub fn tokens(&self) -> [u8; OUTPUT_STREAMS] {
        if self.space {
            let mut t = [0; OUTPUT_STREAMS];
            t[OutputStream::Space as usize] = 1;
            return t;
        }
        [
            self.pitch,
            self.onset,
            self.duration,
            self.measure_length.unwrap_or(ML_FALSE),
            (self.staff == Staff::Lower) as u8,
            self.voice - 1,
            self.trill as u8,
            self.staccato as u8,
            self.stem.index(),
            self.grace as u8,
            self.accidental.index(),
            0,
        ]
    }

    pub fn from_tokens(t: [u8; OUTPUT_STREAMS]) -> Result<Self, TokenizeError> {
        for (i, (&tok, &v)) in t.iter().zip(OUTPUT_VOCAB.iter()).enumerate() {
            if tok as u16 >= v {
                return Err(TokenizeError::TokenOutOfRange { stream: OutputStream::ALL[i].name(), token: tok, vocab: v });
            }
        }
        if t[OutputStream::Space as usize] == 1 {
            return Ok(Self::space());
        }
        Ok(Self {
            pitch: t[0],
            onset: t[1],
            duration: t[2],
            measure_length: if t[3] == ML_FALSE { None } else { Some(t[3]) },
            staff: if t[4] == 1 { Staff::Lower } else { Staff::Upper },
            voice: t[5] + 1,
            trill: t[6] == 1,
            staccato: t[7] == 1,
            stem: Stem::from_index(t[8]).expect("range checked"),
            grace: t[9] == 1,
            accidental: Accidental::from_index(t[10]).expect("range checked"),
            space: false,
        })
    }

    /// Builds a frame from a note whose timing already fits the grid.
    pub(crate) fn from_note(n: &ScoreNote, onset: u8, duration: u8, measure_length: Option<u8>) -> Self {
        Self {
            pitch: n.pitch,
            onset,
            duration,
            measure_length,
            staff: n.staff,
            voice: n.voice.clamp(1, MAX_VOICE),
            trill: n.trill,
            staccato: n.staccato,
            stem: n.stem,
            grace: n.grace,
            accidental: n.accidental,
            space: false,
        }
    }

    pub fn to_note(&self) -> ScoreNote {
        ScoreNote {
            pitch: self.pitch,
            onset: self.onset as Tick,
            duration: if self.grace { 0 } else { self.duration as Tick },
            staff: self.staff,
            voice: self.voice,
            stem: self.stem,
            accidental: self.accidental,
            grace: self.grace,
            trill: self.trill,
            staccato: self.staccato,
            tie_start: false,
            tie_stop: false,
        }
    }
}

/// Parallel token streams, one frame per timestep.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TokenSequences<F> {
    pub frames: Vec<F>,
}

impl<F> TokenSequences<F> {
    pub fn new(frames: Vec<F>) -> Self {
        Self { frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub type InputSequence = TokenSequences<InputFrame>;
pub type OutputSequence = TokenSequences<OutputFrame>;

impl OutputSequence {
    pub fn space_count(&self) -> usize {
        self.frames.iter().filter(|f| f.space).count()
    }
}
