//! Performance-MIDI note model.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum NoteError {
    #[error("pitch {0} outside [0, 127]")]
    Pitch(u8),
    #[error("velocity {0} outside [0, 127]")]
    Velocity(u8),
    #[error("onset must be finite and non-negative")]
    Onset,
    #[error("duration must be finite and strictly positive")]
    Duration,
}

/// A single performed note. Times are in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PerformanceNote {
    pub pitch: u8,
    pub onset: f64,
    pub duration: f64,
    pub velocity: u8,
}

impl PerformanceNote {
    pub fn new(pitch: u8, onset: f64, duration: f64, velocity: u8) -> Result<Self, NoteError> {
        let note = Self { pitch, onset, duration, velocity };
        note.validate()?;
        Ok(note)
    }

    pub fn validate(&self) -> Result<(), NoteError> {
        if self.pitch > 127 {
            return Err(NoteError::Pitch(self.pitch));
        }
        if self.velocity > 127 {
            return Err(NoteError::Velocity(self.velocity));
        }
        if !self.onset.is_finite() || self.onset < 0.0 {
            return Err(NoteError::Onset);
        }
        if !self.duration.is_finite() || self.duration <= 0.0 {
            return Err(NoteError::Duration);
        }
        Ok(())
    }

    pub fn offset(&self) -> f64 {
        self.onset + self.duration
    }

    /// Canonical ordering: onset, then pitch, then duration.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.onset
            .total_cmp(&other.onset)
            .then(self.pitch.cmp(&other.pitch))
            .then(self.duration.total_cmp(&other.duration))
    }
}

/// An ordered set of performed notes.
///
/// Notes are always held in canonical order (see
/// [`PerformanceNote::canonical_cmp`]). The sort is stable, so exact
/// duplicates keep their relative input order.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Performance {
    notes: Vec<PerformanceNote>,
}

impl Performance {
    pub fn new(mut notes: Vec<PerformanceNote>) -> Self {
        canonical_sort(&mut notes);
        Self { notes }
    }

    /// Builds a performance after validating every note.
    pub fn try_new(notes: Vec<PerformanceNote>) -> Result<Self, NoteError> {
        for n in &notes {
            n.validate()?;
        }
        Ok(Self::new(notes))
    }

    pub fn notes(&self) -> &[PerformanceNote] {
        &self.notes
    }

    pub fn into_notes(self) -> Vec<PerformanceNote> {
        self.notes
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Applies `f` to every note and restores canonical order.
    pub fn map_notes(&self, f: impl FnMut(&PerformanceNote) -> PerformanceNote) -> Self {
        Self::new(self.notes.iter().map(f).collect())
    }
}

pub fn canonical_sort(notes: &mut [PerformanceNote]) {
    notes.sort_by(PerformanceNote::canonical_cmp);
}
