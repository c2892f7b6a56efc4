use std::fmt::Write as _;

use pm2s_core::reconstruct::infer_time_signature;
use pm2s_core::spelling::spell;
use pm2s_core::{Accidental, Measure, Score, ScoreNote, Staff, Stem, Tick, TICKS_PER_QUARTER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct WriteReport {
    /// Notes whose accidental fits no letter name; their pitch is spelled
    /// by default while the accidental sign is kept.
    pub spelling_fallbacks: usize,
}

const HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<!DOCTYPE score-partwise PUBLIC "-//Recordare//DTD MusicXML 3.1 Partwise//EN" "http://www.musicxml.org/dtds/partwise.dtd">
<score-partwise version="3.1">
  <part-list>
    <score-part id="P1">
      <part-name>Piano</part-name>
    </score-part>
  </part-list>
  <part id="P1">
"#;

enum Event<'a> {
    Note(&'a ScoreNote),
    Rest { onset: Tick, duration: Tick, staff: Staff, voice: u8 },
}

impl Event<'_> {
    fn voice_key(&self) -> (Staff, u8) {
        match self {
            Event::Note(n) => (n.staff, n.voice),
            Event::Rest { staff, voice, .. } => (*staff, *voice),
        }
    }

    /// Grace notes are written before the notes they precede.
    fn order(&self) -> (Tick, bool, u8, Tick) {
        match self {
            Event::Note(n) => (n.onset, !n.grace, n.pitch, n.duration),
            Event::Rest { onset, duration, .. } => (*onset, true, 0, *duration),
        }
    }
}

fn accidental_name(a: Accidental) -> Option<&'static str> {
    match a {
        Accidental::DoubleFlat => Some("flat-flat"),
        Accidental::Flat => Some("flat"),
        Accidental::Natural => Some("natural"),
        Accidental::Sharp => Some("sharp"),
        Accidental::DoubleSharp => Some("double-sharp"),
        Accidental::None => None,
    }
}

/// Serializes a score at 24 divisions per quarter.
///
/// Notes and rests are written voice by voice, with backup and forward
/// elements moving the time cursor between them; notes sharing onset and
/// duration within a voice become chords. A time signature is written
/// whenever the one inferred from the measure length changes.
pub fn write_musicxml(score: &Score) -> (String, WriteReport) {
    let mut report = WriteReport::default();
    let mut out = String::from(HEADER);
    let mut prev_time = None;
    for (i, m) in score.measures.iter().enumerate() {
        let _ = writeln!(out, "    <measure number=\"{}\">", i + 1);
        let time = infer_time_signature(m.length);
        if i == 0 || (time != prev_time && time.is_some()) {
            out.push_str("      <attributes>\n");
            if i == 0 {
                let _ = writeln!(out, "        <divisions>{TICKS_PER_QUARTER}</divisions>");
            }
            if let Some((num, den)) = time {
                let _ = writeln!(out, "        <time>\n          <beats>{num}</beats>\n          <beat-type>{den}</beat-type>\n        </time>");
            }
            if i == 0 {
                out.push_str("        <staves>2</staves>\n");
            }
            out.push_str("      </attributes>\n");
        }
        if time.is_some() {
            prev_time = time;
        }
        write_measure(&mut out, m, &mut report);
        out.push_str("    </measure>\n");
    }
    out.push_str("  </part>\n</score-partwise>\n");
    (out, report)
}

fn write_measure(out: &mut String, m: &Measure, report: &mut WriteReport) {
    let mut events: Vec<Event> = m.notes.iter().map(Event::Note).collect();
    events.extend(m.rests.iter().map(|r| Event::Rest { onset: r.onset, duration: r.duration, staff: r.staff, voice: r.voice }));
    events.sort_by_key(|e| (e.voice_key(), e.order()));

    let mut cursor: Tick = 0;
    // onset and duration of the last sounding note written in this voice
    let mut chord_anchor: Option<((Staff, u8), Tick, Tick)> = None;
    for e in &events {
        let key = e.voice_key();
        let (onset, duration, grace) = match e {
            Event::Note(n) => (n.onset, n.duration, n.grace),
            Event::Rest { onset, duration, .. } => (*onset, *duration, false),
        };
        let chord = matches!(e, Event::Note(_)) && !grace && chord_anchor == Some((key, onset, duration));
        if !chord {
            move_cursor(out, &mut cursor, onset, key);
        }
        match e {
            Event::Note(n) => write_note(out, n, chord, report),
            Event::Rest { duration, staff, voice, .. } => {
                let _ = writeln!(
                    out,
                    "      <note>\n        <rest/>\n        <duration>{duration}</duration>\n        <voice>{voice}</voice>\n        <staff>{}</staff>\n      </note>",
                    staff.number()
                );
            }
        }
        if !chord && !grace {
            cursor += duration;
        }
        chord_anchor = match e {
            Event::Note(_) if !grace => Some((key, onset, duration)),
            Event::Note(_) => chord_anchor,
            Event::Rest { .. } => None,
        };
    }
    let end = m.length.max(cursor);
    move_cursor(out, &mut cursor, end, (Staff::Upper, 1));
}

fn move_cursor(out: &mut String, cursor: &mut Tick, target: Tick, (staff, voice): (Staff, u8)) {
    if target > *cursor {
        let _ = writeln!(
            out,
            "      <forward>\n        <duration>{}</duration>\n        <voice>{voice}</voice>\n        <staff>{}</staff>\n      </forward>",
            target - *cursor,
            staff.number()
        );
    } else if target < *cursor {
        let _ = writeln!(out, "      <backup>\n        <duration>{}</duration>\n      </backup>", *cursor - target);
    }
    *cursor = target;
}

fn write_note(out: &mut String, n: &ScoreNote, chord: bool, report: &mut WriteReport) {
    let (sp, fallback) = spell(n.pitch, n.accidental);
    report.spelling_fallbacks += fallback as usize;
    out.push_str("      <note>\n");
    if n.grace {
        out.push_str("        <grace/>\n");
    }
    if chord {
        out.push_str("        <chord/>\n");
    }
    let _ = write!(out, "        <pitch>\n          <step>{}</step>\n", sp.step.name());
    if sp.alter != 0 {
        let _ = writeln!(out, "          <alter>{}</alter>", sp.alter);
    }
    let _ = write!(out, "          <octave>{}</octave>\n        </pitch>\n", sp.octave);
    if !n.grace {
        let _ = writeln!(out, "        <duration>{}</duration>", n.duration);
    }
    if n.tie_stop {
        out.push_str("        <tie type=\"stop\"/>\n");
    }
    if n.tie_start {
        out.push_str("        <tie type=\"start\"/>\n");
    }
    let _ = writeln!(out, "        <voice>{}</voice>", n.voice);
    if n.grace {
        out.push_str("        <type>eighth</type>\n");
    }
    if let Some(a) = accidental_name(n.accidental) {
        let _ = writeln!(out, "        <accidental>{a}</accidental>");
    }
    match n.stem {
        Stem::Up => out.push_str("        <stem>up</stem>\n"),
        Stem::Down => out.push_str("        <stem>down</stem>\n"),
        Stem::None => {}
    }
    let _ = writeln!(out, "        <staff>{}</staff>", n.staff.number());
    if n.tie_start || n.tie_stop || n.trill || n.staccato {
        out.push_str("        <notations>\n");
        if n.tie_stop {
            out.push_str("          <tied type=\"stop\"/>\n");
        }
        if n.tie_start {
            out.push_str("          <tied type=\"start\"/>\n");
        }
        if n.trill {
            out.push_str("          <ornaments>\n            <trill-mark/>\n          </ornaments>\n");
        }
        if n.staccato {
            out.push_str("          <articulations>\n            <staccato/>\n          </articulations>\n");
        }
        out.push_str("        </notations>\n");
    }
    out.push_str("      </note>\n");
}
