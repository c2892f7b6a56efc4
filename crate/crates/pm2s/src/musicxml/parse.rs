use num_rational::Ratio;
use roxmltree::{Document, Node, ParsingOptions};

use pm2s_core::score::{merge_ties, MAX_VOICE};
use pm2s_core::spelling::Step;
use pm2s_core::{Accidental, Measure, Score, ScoreNote, Staff, Stem, Tick, TICKS_PER_QUARTER};

type Q = Ratio<i64>;

#[derive(Debug, thiserror::Error)]
pub enum MusicXmlError {
    #[error("xml: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("root element is <{0}>, expected <score-partwise>")]
    NotPartwise(String),
    #[error("document has no part")]
    NoPart,
    #[error("line {line}: invalid <{element}> value {text:?}")]
    Value { line: u32, element: &'static str, text: String },
    #[error("line {line}: pitch outside the MIDI range")]
    Pitch { line: u32 },
}

/// How a first measure shorter than the second is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnacrusisMode {
    /// Keep the true, short length.
    #[default]
    Short,
    /// Extend the pickup to the following measure's length, shifting its
    /// notes to the end.
    PadToFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    pub anacrusis: AnacrusisMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct ParseReport {
    /// Times that were not whole ticks and were rounded.
    pub lossy_conversions: usize,
    /// Notes removed because they are not printed.
    pub hidden_removed: usize,
    pub voices_clamped: usize,
    pub tied_segments_merged: usize,
    pub anacrusis_padded: bool,
}

fn child<'a, 'i>(n: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    n.children().find(|c| c.has_tag_name(name))
}

fn line(doc: &Document, n: Node) -> u32 {
    doc.text_pos_at(n.range().start).row
}

/// Parses a plain or decimal number such as "12" or "-0.5".
fn decimal(s: &str) -> Option<Q> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
        return None;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let whole: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let part: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let v = Q::new(whole.checked_mul(den)?.checked_add(part)?, den);
    Some(if neg { -v } else { v })
}

struct Ctx<'a, 'i> {
    doc: &'a Document<'i>,
    report: ParseReport,
}

impl<'a, 'i> Ctx<'a, 'i> {
    fn number(&self, n: Node, element: &'static str) -> Result<Q, MusicXmlError> {
        let text = n.text().unwrap_or("");
        decimal(text).ok_or_else(|| MusicXmlError::Value { line: line(self.doc, n), element, text: text.to_string() })
    }

    fn child_number(&self, parent: Node, element: &'static str) -> Result<Option<Q>, MusicXmlError> {
        child(parent, element).map(|c| self.number(c, element)).transpose()
    }

    fn ticks(&mut self, q: Q) -> Tick {
        let t = q * Q::from_integer(TICKS_PER_QUARTER as i64);
        if !t.is_integer() {
            self.report.lossy_conversions += 1;
        }
        t.round().to_integer().max(0) as Tick
    }
}

fn accidental(text: &str) -> Accidental {
    match text.trim() {
        "sharp" => Accidental::Sharp,
        "flat" => Accidental::Flat,
        "natural" => Accidental::Natural,
        "double-sharp" | "sharp-sharp" => Accidental::DoubleSharp,
        "flat-flat" | "double-flat" => Accidental::DoubleFlat,
        _ => Accidental::None,
    }
}

/// Reads the first part of a partwise document.
///
/// Tied chains are merged into single notes, unprinted notes are removed,
/// rests only advance time, and every time value is rounded to the nearest
/// 1/24 quarter. A measure's length is the furthest time position reached
/// inside it.
pub fn parse_musicxml(text: &str, opts: &ParseOptions) -> Result<(Score, ParseReport), MusicXmlError> {
    let doc = Document::parse_with_options(text, ParsingOptions { allow_dtd: true, ..ParsingOptions::default() })?;
    let root = doc.root_element();
    if !root.has_tag_name("score-partwise") {
        return Err(MusicXmlError::NotPartwise(root.tag_name().name().to_string()));
    }
    let part = child(root, "part").ok_or(MusicXmlError::NoPart)?;
    let mut ctx = Ctx { doc: &doc, report: ParseReport::default() };
    let mut divisions = Q::from_integer(1);
    let mut measures = Vec::new();
    for m in part.children().filter(|c| c.has_tag_name("measure")) {
        let mut cursor = Q::from_integer(0);
        let mut furthest = cursor;
        let mut last_onset = cursor;
        let mut notes = Vec::new();
        for el in m.children().filter(Node::is_element) {
            match el.tag_name().name() {
                "attributes" => {
                    if let Some(d) = ctx.child_number(el, "divisions")? {
                        if d <= Q::from_integer(0) {
                            return Err(MusicXmlError::Value { line: line(&doc, el), element: "divisions", text: d.to_string() });
                        }
                        divisions = d;
                    }
                }
                "backup" => {
                    let d = ctx.child_number(el, "duration")?.unwrap_or_default();
                    cursor = (cursor - d / divisions).max(Q::from_integer(0));
                }
                "forward" => {
                    let d = ctx.child_number(el, "duration")?.unwrap_or_default();
                    cursor += d / divisions;
                    furthest = furthest.max(cursor);
                }
                "note" => {
                    let grace = child(el, "grace").is_some();
                    let chord = child(el, "chord").is_some();
                    let duration = if grace { Q::from_integer(0) } else { ctx.child_number(el, "duration")?.unwrap_or_default() / divisions };
                    let onset = if chord { last_onset } else { cursor };
                    if !chord {
                        last_onset = cursor;
                        cursor += duration;
                        furthest = furthest.max(cursor);
                    }
                    let Some(pitch) = child(el, "pitch") else { continue };
                    if el.attribute("print-object") == Some("no") {
                        ctx.report.hidden_removed += 1;
                        continue;
                    }
                    notes.push(read_note(&mut ctx, el, pitch, onset, duration, grace)?);
                }
                _ => {}
            }
        }
        let length = ctx.ticks(furthest);
        measures.push(Measure::new(length, notes));
    }

    let before: usize = measures.iter().map(|m| m.notes.len()).sum();
    let mut score = merge_ties(&Score::new(measures));
    ctx.report.tied_segments_merged = before - score.note_count();
    if opts.anacrusis == AnacrusisMode::PadToFull && score.measures.len() >= 2 {
        let full = score.measures[1].length;
        let first = &mut score.measures[0];
        if first.length < full {
            let shift = full - first.length;
            for n in &mut first.notes {
                n.onset += shift;
            }
            first.length = full;
            ctx.report.anacrusis_padded = true;
        }
    }
    Ok((score, ctx.report))
}

fn read_note(ctx: &mut Ctx, el: Node, pitch: Node, onset: Q, duration: Q, grace: bool) -> Result<ScoreNote, MusicXmlError> {
    let doc = ctx.doc;
    let step_node = child(pitch, "step").ok_or(MusicXmlError::Pitch { line: line(doc, pitch) })?;
    let step_text = step_node.text().unwrap_or("").trim();
    let step = Step::parse(step_text)
        .ok_or_else(|| MusicXmlError::Value { line: line(doc, step_node), element: "step", text: step_text.to_string() })?;
    let alter = ctx.child_number(pitch, "alter")?.unwrap_or_default();
    if !alter.is_integer() {
        ctx.report.lossy_conversions += 1;
    }
    let octave = ctx.child_number(pitch, "octave")?.ok_or(MusicXmlError::Pitch { line: line(doc, pitch) })?;
    let midi = (octave.to_integer() + 1) * 12 + step.pitch_class() as i64 + alter.round().to_integer();
    if !(0..=127).contains(&midi) {
        return Err(MusicXmlError::Pitch { line: line(doc, pitch) });
    }

    let mut n = ScoreNote::new(midi as u8, ctx.ticks(onset), if grace { 0 } else { ctx.ticks(duration) });
    n.grace = grace;
    if let Some(v) = ctx.child_number(el, "voice")? {
        let v = v.to_integer().max(1);
        if v > MAX_VOICE as i64 {
            ctx.report.voices_clamped += 1;
        }
        n.voice = v.min(MAX_VOICE as i64) as u8;
    }
    if let Some(s) = ctx.child_number(el, "staff")? {
        n.staff = Staff::from_number(s.to_integer().max(1) as u32);
    }
    n.stem = match child(el, "stem").and_then(|s| s.text()).map(str::trim) {
        Some("up") => Stem::Up,
        Some("down") => Stem::Down,
        _ => Stem::None,
    };
    n.accidental = child(el, "accidental").and_then(|a| a.text()).map(accidental).unwrap_or(Accidental::None);

    let mut tie = |ty: Option<&str>| match ty {
        Some("start") => n.tie_start = true,
        Some("stop") => n.tie_stop = true,
        _ => {}
    };
    let direct: Vec<Option<&str>> = el.children().filter(|c| c.has_tag_name("tie")).map(|c| c.attribute("type")).collect();
    let notations: Vec<Node> = el.children().filter(|c| c.has_tag_name("notations")).collect();
    let tied: Vec<Option<&str>> = notations
        .iter()
        .flat_map(|no| no.children().filter(|c| c.has_tag_name("tied")).map(|c| c.attribute("type")))
        .collect();
    for ty in if direct.is_empty() { tied } else { direct } {
        tie(ty);
    }
    for no in notations {
        for c in no.children().filter(Node::is_element) {
            match c.tag_name().name() {
                "ornaments" => n.trill |= child(c, "trill-mark").is_some(),
                "articulations" => n.staccato |= child(c, "staccato").is_some(),
                _ => {}
            }
        }
    }
    Ok(n)
}
