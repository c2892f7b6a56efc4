//! Pitch spelling: mapping (pitch, displayed accidental) to letter names,
//! and spelling-aware transposition along the line of fifths.

use crate::score::Accidental;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Step {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Step {
    pub const ALL: [Step; 7] = [Step::C, Step::D, Step::E, Step::F, Step::G, Step::A, Step::B];

    pub fn pitch_class(self) -> i32 {
        [0, 2, 4, 5, 7, 9, 11][self as usize]
    }

    /// Position of the natural step on the line of fifths (C = 0).
    pub fn fifths(self) -> i32 {
        [0, 2, 4, -1, 1, 3, 5][self as usize]
    }

    pub fn from_pitch_class(pc: i32) -> Option<Step> {
        Self::ALL.into_iter().find(|s| s.pitch_class() == pc.rem_euclid(12))
    }

    pub fn name(self) -> &'static str {
        ["C", "D", "E", "F", "G", "A", "B"][self as usize]
    }

    pub fn parse(s: &str) -> Option<Step> {
        Self::ALL.into_iter().find(|st| st.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Spelling {
    pub step: Step,
    pub alter: i8,
    pub octave: i8,
}

impl Spelling {
    pub fn pitch(&self) -> i32 {
        (self.octave as i32 + 1) * 12 + self.step.pitch_class() + self.alter as i32
    }

    pub fn fifths(&self) -> i32 {
        self.step.fifths() + 7 * self.alter as i32
    }

    fn with_step_alter(pitch: u8, step: Step, alter: i8) -> Spelling {
        let natural = pitch as i32 - alter as i32;
        Spelling { step, alter, octave: (natural.div_euclid(12) - 1) as i8 }
    }
}

/// Spelling used when no accidental is displayed: the natural letter if the
/// pitch class has one, otherwise the sharp spelling.
pub fn default_spelling(pitch: u8) -> Spelling {
    let pc = pitch as i32 % 12;
    match Step::from_pitch_class(pc) {
        Some(step) => Spelling::with_step_alter(pitch, step, 0),
        None => {
            let step = Step::from_pitch_class(pc - 1).expect("every black key has a white key below");
            Spelling::with_step_alter(pitch, step, 1)
        }
    }
}

/// Spells `pitch` with the given displayed accidental.
///
/// Returns the spelling and whether the accidental was inconsistent with
/// every letter name and the default spelling was used instead.
pub fn spell(pitch: u8, accidental: Accidental) -> (Spelling, bool) {
    match accidental.alter() {
        None => (default_spelling(pitch), false),
        Some(alter) => match Step::from_pitch_class(pitch as i32 - alter as i32) {
            Some(step) => (Spelling::with_step_alter(pitch, step, alter), false),
            None => (default_spelling(pitch), true),
        },
    }
}

/// Line-of-fifths shift equivalent to `semitones`, chosen in [-5, 6].
pub fn fifth_shift(semitones: i32) -> i32 {
    let q = (7 * semitones).rem_euclid(12);
    if q > 6 {
        q - 12
    } else {
        q
    }
}

/// Re-derives the displayed accidental when a note at `pitch` is moved by
/// `semitones` to `new_pitch` (which may differ from `pitch + semitones` by
/// whole octaves).
///
/// Undisplayed accidentals stay undisplayed. Displayed ones move along the
/// line of fifths; results beyond a double sharp or flat fall back to the
/// default spelling of the new pitch. The flag reports such a fallback.
pub fn transpose_accidental(pitch: u8, accidental: Accidental, semitones: i32, new_pitch: u8) -> (Accidental, bool) {
    if accidental == Accidental::None || semitones.rem_euclid(12) == 0 {
        return (accidental, false);
    }
    let (spelling, _) = spell(pitch, accidental);
    let f = spelling.fifths() + fifth_shift(semitones);
    let base = (f + 1).rem_euclid(7) - 1;
    let alter = (f - base) / 7;
    match i8::try_from(alter).ok().and_then(Accidental::from_alter) {
        Some(acc) => (acc, false),
        None => {
            let fallback = default_spelling(new_pitch);
            (Accidental::from_alter(fallback.alter).expect("default alter is 0 or 1"), true)
        }
    }
}
