//! Standard MIDI File reading and writing for performance note lists.

use std::collections::HashMap;

use pm2s_core::{Performance, PerformanceNote};

/// Ticks per quarter note of written files.
pub const WRITE_PPQ: u16 = 480;
/// Microseconds per quarter note of written files (120 BPM).
pub const WRITE_TEMPO: u32 = 500_000;
const DEFAULT_TEMPO: u32 = 500_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("byte {offset}: {kind}")]
pub struct MidiError {
    pub offset: usize,
    pub kind: MidiErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MidiErrorKind {
    #[error("missing MThd header")]
    NoHeader,
    #[error("header length {0} is shorter than 6")]
    HeaderLength(u32),
    #[error("unsupported format {0}")]
    Format(u16),
    #[error("zero ticks per quarter")]
    Division,
    #[error("expected MTrk chunk")]
    NoTrack,
    #[error("chunk runs past end of file")]
    Truncated,
    #[error("variable-length quantity longer than 4 bytes")]
    VarLen,
    #[error("data byte without running status")]
    RunningStatus,
    #[error("invalid note data")]
    NoteData,
}

/// Non-fatal conditions met while parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct MidiReport {
    /// Note-ons without a matching note-off, closed at the end of their track.
    pub dangling_closed: usize,
    /// Same-key note-ons that closed an earlier still-sounding note.
    pub overlaps_closed: usize,
    pub zero_length_dropped: usize,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, kind: MidiErrorKind) -> MidiError {
        MidiError { offset: self.pos, kind }
    }

    fn byte(&mut self) -> Result<u8, MidiError> {
        let b = *self.data.get(self.pos).ok_or_else(|| self.err(MidiErrorKind::Truncated))?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], MidiError> {
        if self.data.len() - self.pos < n {
            return Err(self.err(MidiErrorKind::Truncated));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, MidiError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, MidiError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn varlen(&mut self) -> Result<u32, MidiError> {
        let start = self.pos;
        let mut v = 0u32;
        for _ in 0..4 {
            let b = self.byte()?;
            v = (v << 7) | (b & 0x7f) as u32;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(MidiError { offset: start, kind: MidiErrorKind::VarLen })
    }
}

enum Timing {
    Metrical(u16),
    /// Seconds per tick.
    Smpte(f64),
}

/// Maps ticks to seconds through a tempo map.
struct TempoMap {
    timing: Timing,
    /// (tick, seconds at tick, microseconds per quarter from tick on)
    segments: Vec<(u64, f64, u32)>,
}

impl TempoMap {
    fn new(timing: Timing, mut changes: Vec<(u64, u32)>) -> Self {
        changes.sort_by_key(|c| c.0);
        let mut segments = vec![(0u64, 0.0f64, DEFAULT_TEMPO)];
        for (tick, tempo) in changes {
            let &(t0, s0, q0) = segments.last().unwrap();
            let s = s0 + Self::span(&timing, tick - t0, q0);
            if tick == t0 {
                segments.last_mut().unwrap().2 = tempo;
            } else {
                segments.push((tick, s, tempo));
            }
        }
        Self { timing, segments }
    }

    fn span(timing: &Timing, ticks: u64, tempo: u32) -> f64 {
        match timing {
            Timing::Metrical(ppq) => ticks as f64 * tempo as f64 / 1e6 / *ppq as f64,
            Timing::Smpte(spt) => ticks as f64 * spt,
        }
    }

    fn seconds(&self, tick: u64) -> f64 {
        let i = self.segments.partition_point(|s| s.0 <= tick) - 1;
        let (t0, s0, q) = self.segments[i];
        s0 + Self::span(&self.timing, tick - t0, q)
    }
}

struct RawNote {
    pitch: u8,
    velocity: u8,
    on: u64,
    off: u64,
}

/// Parses a format 0 or 1 file into a canonically sorted performance.
/// All tracks and channels are merged.
pub fn parse_midi(data: &[u8]) -> Result<(Performance, MidiReport), MidiError> {
    let mut r = Reader { data, pos: 0 };
    if r.take(4).map_err(|e| MidiError { kind: MidiErrorKind::NoHeader, ..e })? != b"MThd" {
        return Err(MidiError { offset: 0, kind: MidiErrorKind::NoHeader });
    }
    let header_len = r.u32()?;
    if header_len < 6 {
        return Err(r.err(MidiErrorKind::HeaderLength(header_len)));
    }
    let fmt_at = r.pos;
    let format = r.u16()?;
    if format > 1 {
        return Err(MidiError { offset: fmt_at, kind: MidiErrorKind::Format(format) });
    }
    let ntracks = r.u16()?;
    let div_at = r.pos;
    let division = r.u16()?;
    r.take(header_len as usize - 6)?;
    let timing = if division & 0x8000 != 0 {
        let fps = match -((division >> 8) as i8) {
            29 => 29.97,
            f => f as f64,
        };
        let tpf = (division & 0xff) as f64;
        if fps <= 0.0 || tpf == 0.0 {
            return Err(MidiError { offset: div_at, kind: MidiErrorKind::Division });
        }
        Timing::Smpte(1.0 / (fps * tpf))
    } else if division == 0 {
        return Err(MidiError { offset: div_at, kind: MidiErrorKind::Division });
    } else {
        Timing::Metrical(division)
    };

    let mut report = MidiReport::default();
    let mut notes = Vec::new();
    let mut tempos = Vec::new();
    let mut found = 0;
    while found < ntracks && r.pos < data.len() {
        let chunk_at = r.pos;
        let id = r.take(4)?;
        let len = r.u32()? as usize;
        if id != b"MTrk" {
            // unknown chunks are skipped
            r.take(len).map_err(|_| MidiError { offset: chunk_at, kind: MidiErrorKind::NoTrack })?;
            continue;
        }
        let body_at = r.pos;
        let body = r.take(len).map_err(|_| MidiError { offset: chunk_at, kind: MidiErrorKind::Truncated })?;
        parse_track(body, body_at, &mut notes, &mut tempos, &mut report)?;
        found += 1;
    }
    if ntracks > 0 && found == 0 {
        return Err(MidiError { offset: r.pos, kind: MidiErrorKind::NoTrack });
    }

    let map = TempoMap::new(timing, tempos);
    let mut out = Vec::with_capacity(notes.len());
    for n in notes {
        let onset = map.seconds(n.on);
        let duration = map.seconds(n.off) - onset;
        if n.off <= n.on || duration <= 0.0 {
            report.zero_length_dropped += 1;
            continue;
        }
        out.push(PerformanceNote { pitch: n.pitch, onset, duration, velocity: n.velocity });
    }
    Ok((Performance::new(out), report))
}

fn parse_track(
    body: &[u8],
    base: usize,
    notes: &mut Vec<RawNote>,
    tempos: &mut Vec<(u64, u32)>,
    report: &mut MidiReport,
) -> Result<(), MidiError> {
    let mut r = Reader { data: body, pos: 0 };
    let shift = |e: MidiError| MidiError { offset: e.offset + base, ..e };
    let mut tick = 0u64;
    let mut status: Option<u8> = None;
    // (channel, pitch) -> (onset tick, velocity)
    let mut open: HashMap<(u8, u8), (u64, u8)> = HashMap::new();
    while r.pos < body.len() {
        tick += r.varlen().map_err(shift)? as u64;
        let first = r.byte().map_err(shift)?;
        let (st, running_data) = if first & 0x80 != 0 {
            (first, None)
        } else {
            match status {
                Some(s) => (s, Some(first)),
                None => return Err(MidiError { offset: base + r.pos - 1, kind: MidiErrorKind::RunningStatus }),
            }
        };
        match st {
            0xff => {
                status = None;
                let ty = r.byte().map_err(shift)?;
                let len = r.varlen().map_err(shift)? as usize;
                let payload = r.take(len).map_err(shift)?;
                match ty {
                    0x51 if len == 3 => {
                        tempos.push((tick, u32::from_be_bytes([0, payload[0], payload[1], payload[2]])));
                    }
                    0x2f => break,
                    _ => {}
                }
            }
            0xf0 | 0xf7 => {
                status = None;
                let len = r.varlen().map_err(shift)? as usize;
                r.take(len).map_err(shift)?;
            }
            0xf1..=0xfe => {
                // system common / realtime messages carry no length; skip data bytes per type
                let n = match st {
                    0xf1 | 0xf3 => 1,
                    0xf2 => 2,
                    _ => 0,
                };
                r.take(n).map_err(shift)?;
            }
            _ => {
                status = Some(st);
                let kind = st & 0xf0;
                let ch = st & 0x0f;
                let d1 = match running_data {
                    Some(b) => b,
                    None => r.byte().map_err(shift)?,
                };
                let d2 = if kind == 0xc0 || kind == 0xd0 { 0 } else { r.byte().map_err(shift)? };
                if d1 > 127 || d2 > 127 {
                    return Err(MidiError { offset: base + r.pos - 1, kind: MidiErrorKind::NoteData });
                }
                match kind {
                    0x90 if d2 > 0 => {
                        if let Some((on, vel)) = open.insert((ch, d1), (tick, d2)) {
                            report.overlaps_closed += 1;
                            notes.push(RawNote { pitch: d1, velocity: vel, on, off: tick });
                        }
                    }
                    0x80 | 0x90 => {
                        if let Some((on, vel)) = open.remove(&(ch, d1)) {
                            notes.push(RawNote { pitch: d1, velocity: vel, on, off: tick });
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    let mut dangling: Vec<_> = open.into_iter().collect();
    dangling.sort_unstable();
    for ((_, pitch), (on, velocity)) in dangling {
        report.dangling_closed += 1;
        notes.push(RawNote { pitch, velocity, on, off: tick });
    }
    Ok(())
}

fn write_varlen(out: &mut Vec<u8>, mut v: u32) {
    let mut buf = [0u8; 4];
    let mut i = 3;
    buf[i] = (v & 0x7f) as u8;
    v >>= 7;
    while v > 0 {
        i -= 1;
        buf[i] = (v & 0x7f) as u8 | 0x80;
        v >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

fn to_ticks(seconds: f64) -> u64 {
    let per_second = WRITE_PPQ as f64 * 1e6 / WRITE_TEMPO as f64;
    (seconds * per_second).round().max(0.0) as u64
}

/// Writes a format 0 file at 480 ticks per quarter and 120 BPM.
///
/// Overlapping notes of equal pitch are spread over separate channels so
/// that reading the file back recovers each of them. Velocity 0 is written
/// as 1, since a zero-velocity note-on means note-off.
pub fn write_midi(perf: &Performance) -> Vec<u8> {
    // (tick, is_on, channel, pitch, velocity)
    let mut events: Vec<(u64, bool, u8, u8, u8)> = Vec::with_capacity(2 * perf.len());
    let mut busy_until: HashMap<(u8, u8), u64> = HashMap::new();
    for n in perf.notes() {
        let on = to_ticks(n.onset);
        let off = on + to_ticks(n.duration).max(1);
        let channel = (0u8..16)
            .filter(|&c| c != 9)
            .find(|&c| busy_until.get(&(c, n.pitch)).is_none_or(|&end| end <= on))
            .unwrap_or(0);
        busy_until.insert((channel, n.pitch), off);
        events.push((on, true, channel, n.pitch, n.velocity.max(1)));
        events.push((off, false, channel, n.pitch, 0));
    }
    // note-offs before note-ons at equal ticks
    events.sort_by_key(|&(t, on, c, p, _)| (t, on, c, p));

    let mut track = Vec::new();
    write_varlen(&mut track, 0);
    track.extend_from_slice(&[0xff, 0x51, 0x03]);
    track.extend_from_slice(&WRITE_TEMPO.to_be_bytes()[1..]);
    let mut last = 0;
    for (t, on, c, p, v) in events {
        write_varlen(&mut track, (t - last) as u32);
        last = t;
        if on {
            track.extend_from_slice(&[0x90 | c, p, v]);
        } else {
            track.extend_from_slice(&[0x80 | c, p, 0]);
        }
    }
    write_varlen(&mut track, 0);
    track.extend_from_slice(&[0xff, 0x2f, 0x00]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&WRITE_PPQ.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    out
}
