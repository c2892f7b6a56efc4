//! Attribute-flattened serialization: one token per attribute, in a single
//! stream. Used as the baseline when counting sequence lengths against the
//! compound framing.

use alloc::vec::Vec;

use crate::score::{Accidental, Score, Staff, Stem, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatToken {
    Bar,
    MeasureLength(Tick),
    Position(Tick),
    Pitch(u8),
    Duration(Tick),
    Staff(Staff),
    Voice(u8),
    Stem(Stem),
    Accidental(Accidental),
    Grace,
    Trill,
    Staccato,
}

/// Serializes a score as a flat token list: a bar and length token per
/// measure, then per note its position, pitch, duration, staff, voice and
/// stem, plus one token for each displayed accidental or set ornament flag.
pub fn flatten_score(score: &Score) -> Vec<FlatToken> {
    let mut out = Vec::new();
    for m in &score.measures {
        out.push(FlatToken::Bar);
        out.push(FlatToken::MeasureLength(m.length));
        for n in &m.notes {
            out.extend([
                FlatToken::Position(n.onset),
                FlatToken::Pitch(n.pitch),
                FlatToken::Duration(n.duration),
                FlatToken::Staff(n.staff),
                FlatToken::Voice(n.voice),
                FlatToken::Stem(n.stem),
            ]);
            if n.accidental != Accidental::None {
                out.push(FlatToken::Accidental(n.accidental));
            }
            if n.grace {
                out.push(FlatToken::Grace);
            }
            if n.trill {
                out.push(FlatToken::Trill);
            }
            if n.staccato {
                out.push(FlatToken::Staccato);
            }
        }
    }
    out
}
