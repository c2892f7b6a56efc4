//! Notated score model on a 1/24-quarter tick grid.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Musical time in ticks; one tick is 1/24 of a quarter note.
pub type Tick = u32;

pub const TICKS_PER_QUARTER: Tick = 24;

/// Longest measure the token grid can express (6 quarters).
pub const MAX_MEASURE_TICKS: Tick = 6 * TICKS_PER_QUARTER;

/// Longest note duration the token grid can express (4 quarters).
pub const MAX_DURATION_TICKS: Tick = 4 * TICKS_PER_QUARTER;

pub const MAX_VOICE: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Staff {
    #[default]
    Upper,
    Lower,
}

impl Staff {
    pub fn number(self) -> u8 {
        match self {
            Staff::Upper => 1,
            Staff::Lower => 2,
        }
    }

    pub fn from_number(n: u32) -> Self {
        if n == 2 {
            Staff::Lower
        } else {
            Staff::Upper
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Stem {
    Up,
    Down,
    #[default]
    None,
}

impl Stem {
    pub const ALL: [Stem; 3] = [Stem::Up, Stem::Down, Stem::None];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(i as usize).copied()
    }
}

/// Displayed accidental of a note.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Accidental {
    DoubleFlat,
    Flat,
    Natural,
    Sharp,
    DoubleSharp,
    #[default]
    None,
}

impl Accidental {
    pub const ALL: [Accidental; 6] = [
        Accidental::DoubleFlat,
        Accidental::Flat,
        Accidental::Natural,
        Accidental::Sharp,
        Accidental::DoubleSharp,
        Accidental::None,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(i as usize).copied()
    }

    /// Chromatic alteration in semitones, or `None` for an undisplayed accidental.
    pub fn alter(self) -> Option<i8> {
        match self {
            Accidental::DoubleFlat => Some(-2),
            Accidental::Flat => Some(-1),
            Accidental::Natural => Some(0),
            Accidental::Sharp => Some(1),
            Accidental::DoubleSharp => Some(2),
            Accidental::None => None,
        }
    }

    pub fn from_alter(alter: i8) -> Option<Self> {
        match alter {
            -2 => Some(Accidental::DoubleFlat),
            -1 => Some(Accidental::Flat),
            0 => Some(Accidental::Natural),
            1 => Some(Accidental::Sharp),
            2 => Some(Accidental::DoubleSharp),
            _ => None,
        }
    }
}

/// A notated note. `onset` is relative to the start of its measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScoreNote {
    pub pitch: u8,
    pub onset: Tick,
    pub duration: Tick,
    pub staff: Staff,
    pub voice: u8,
    pub stem: Stem,
    pub accidental: Accidental,
    pub grace: bool,
    pub trill: bool,
    pub staccato: bool,
    /// Engraving only: this segment continues into a tied successor.
    pub tie_start: bool,
    /// Engraving only: this segment continues a tied predecessor.
    pub tie_stop: bool,
}

impl ScoreNote {
    pub fn new(pitch: u8, onset: Tick, duration: Tick) -> Self {
        Self {
            pitch,
            onset,
            duration,
            staff: Staff::Upper,
            voice: 1,
            stem: Stem::None,
            accidental: Accidental::None,
            grace: false,
            trill: false,
            staccato: false,
            tie_start: false,
            tie_stop: false,
        }
    }

    pub fn end(&self) -> Tick {
        self.onset + self.duration
    }

    fn key(&self) -> impl Ord {
        (
            (self.onset, self.pitch, self.duration),
            (self.staff, self.voice, self.stem, self.accidental),
            (self.grace, self.trill, self.staccato, self.tie_stop, self.tie_start),
        )
    }

    /// Canonical ordering: onset, pitch, duration, then the remaining
    /// attributes so that the order is total.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }

    /// True when the eleven token attributes agree (engraving tie flags ignored).
    pub fn same_attributes(&self, other: &Self) -> bool {
        let strip = |n: &ScoreNote| ScoreNote { tie_start: false, tie_stop: false, ..*n };
        strip(self) == strip(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Rest {
    pub onset: Tick,
    pub duration: Tick,
    pub staff: Staff,
    pub voice: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Measure {
    pub length: Tick,
    pub notes: Vec<ScoreNote>,
    pub rests: Vec<Rest>,
}

impl Measure {
    pub fn new(length: Tick, mut notes: Vec<ScoreNote>) -> Self {
        notes.sort_by(ScoreNote::canonical_cmp);
        Self { length, notes, rests: Vec::new() }
    }

    pub fn sort(&mut self) {
        self.notes.sort_by(ScoreNote::canonical_cmp);
        self.rests.sort_by_key(|r| (r.staff, r.voice, r.onset));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("measure {measure}: pitch {pitch} outside [0, 127]")]
    Pitch { measure: usize, pitch: u8 },
    #[error("measure {measure}: voice {voice} outside [1, 8]")]
    Voice { measure: usize, voice: u8 },
    #[error("measure {measure}: note onset {onset} not inside measure of length {length}")]
    Onset { measure: usize, onset: Tick, length: Tick },
    #[error("measure {measure}: grace note with nonzero duration")]
    GraceDuration { measure: usize },
}

/// A single-part score as an ordered list of measures.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Score {
    pub measures: Vec<Measure>,
}

impl Score {
    pub fn new(measures: Vec<Measure>) -> Self {
        let mut s = Self { measures };
        s.sort();
        s
    }

    pub fn sort(&mut self) {
        for m in &mut self.measures {
            m.sort();
        }
    }

    /// Total note count (N_score).
    pub fn note_count(&self) -> usize {
        self.measures.iter().map(|m| m.notes.len()).sum()
    }

    /// Absolute tick at which each measure starts.
    pub fn measure_starts(&self) -> Vec<Tick> {
        let mut starts = Vec::with_capacity(self.measures.len());
        let mut t = 0;
        for m in &self.measures {
            starts.push(t);
            t += m.length;
        }
        starts
    }

    pub fn total_length(&self) -> Tick {
        self.measures.iter().map(|m| m.length).sum()
    }

    /// All notes in canonical order paired with their absolute onset.
    pub fn flat_notes(&self) -> Vec<(Tick, ScoreNote)> {
        let starts = self.measure_starts();
        self.measures
            .iter()
            .zip(starts)
            .flat_map(|(m, s)| m.notes.iter().map(move |n| (s + n.onset, *n)))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        for (i, m) in self.measures.iter().enumerate() {
            for n in &m.notes {
                if n.pitch > 127 {
                    return Err(ScoreError::Pitch { measure: i, pitch: n.pitch });
                }
                if n.voice == 0 || n.voice > MAX_VOICE {
                    return Err(ScoreError::Voice { measure: i, voice: n.voice });
                }
                if n.grace && n.duration != 0 {
                    return Err(ScoreError::GraceDuration { measure: i });
                }
                let inside = if n.grace { n.onset <= m.length } else { n.onset < m.length };
                if !inside {
                    return Err(ScoreError::Onset { measure: i, onset: n.onset, length: m.length });
                }
            }
        }
        Ok(())
    }

    /// True when no sounding note extends past its barline, i.e. the score
    /// can be written without ties.
    pub fn fits_measures(&self) -> bool {
        self.measures
            .iter()
            .all(|m| m.notes.iter().all(|n| n.grace || n.end() <= m.length))
    }
}

/// Merges tied note chains into single notes.
///
/// A note flagged `tie_stop` is folded into the most recent open tie of the
/// same pitch, preferring one in the same staff and voice. The merged note
/// stays where the chain started and its duration is the sum of the
/// segments. Unclosed ties simply end; stray tie stops become plain notes.
pub fn merge_ties(score: &Score) -> Score {
    let mut measures: Vec<Measure> = score
        .measures
        .iter()
        .map(|m| Measure { length: m.length, notes: Vec::new(), rests: m.rests.clone() })
        .collect();
    // (measure, index in measure) of every open tie chain
    let mut open: Vec<(usize, usize)> = Vec::new();
    for (mi, m) in score.measures.iter().enumerate() {
        let mut order: Vec<&ScoreNote> = m.notes.iter().collect();
        order.sort_by_key(|n| (n.onset, n.grace));
        for n in order {
            if n.tie_stop && !n.grace {
                let note_of = |&(a, b): &(usize, usize)| measures[a].notes[b];
                let found = open
                    .iter()
                    .rposition(|k| {
                        let o = note_of(k);
                        o.pitch == n.pitch && o.staff == n.staff && o.voice == n.voice
                    })
                    .or_else(|| open.iter().rposition(|k| note_of(k).pitch == n.pitch));
                if let Some(pos) = found {
                    let (a, b) = open[pos];
                    let head = &mut measures[a].notes[b];
                    head.duration += n.duration;
                    if !n.tie_start {
                        head.tie_start = false;
                        open.remove(pos);
                    }
                    continue;
                }
            }
            let mut note = *n;
            note.tie_stop = false;
            measures[mi].notes.push(note);
            if note.tie_start && !note.grace {
                open.push((mi, measures[mi].notes.len() - 1));
            }
        }
    }
    for m in &mut measures {
        for n in &mut m.notes {
            n.tie_start = false;
        }
    }
    Score::new(measures)
}
