//! Score-similarity errors and ornament F1 between a reference and a
//! predicted score.

use alloc::vec;
use alloc::vec::Vec;

use crate::score::{Score, ScoreNote, Tick};
use crate::spelling::spell;

/// Order-preserving, pitch-exact note alignment between two flat note lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// Index pairs (reference, prediction), increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub ref_len: usize,
    pub pred_len: usize,
}

impl Matching {
    pub fn misses(&self) -> usize {
        self.ref_len - self.pairs.len()
    }

    pub fn extras(&self) -> usize {
        self.pred_len - self.pairs.len()
    }
}

const SKIP_REF: u8 = 0;
const SKIP_PRED: u8 = 1;
const MATCH: u8 = 2;

/// 2-bit direction table for the traceback.
struct Directions {
    cols: usize,
    bits: Vec<u8>,
}

impl Directions {
    fn new(rows: usize, cols: usize) -> Self {
        Self { cols, bits: vec![0; (rows * cols).div_ceil(4)] }
    }

    fn set(&mut self, i: usize, j: usize, d: u8) {
        let k = i * self.cols + j;
        let shift = (k % 4) * 2;
        self.bits[k / 4] = (self.bits[k / 4] & !(3 << shift)) | (d << shift);
    }

    fn get(&self, i: usize, j: usize) -> u8 {
        let k = i * self.cols + j;
        (self.bits[k / 4] >> ((k % 4) * 2)) & 3
    }
}

/// Longest common pitch subsequence of two note sequences, which minimizes
/// misses plus extras. On ties the traceback matches as early as possible.
pub fn match_pitches(reference: &[u8], prediction: &[u8]) -> Matching {
    let (n, m) = (reference.len(), prediction.len());
    let mut dirs = Directions::new(n, m);
    // suffix lengths: next[j] = L[i+1][j], cur[j] = L[i][j]
    let mut next = vec![0u32; m + 1];
    let mut cur = vec![0u32; m + 1];
    for i in (0..n).rev() {
        cur[m] = 0;
        for j in (0..m).rev() {
            let (v, d) = if reference[i] == prediction[j] {
                (next[j + 1] + 1, MATCH)
            } else if next[j] >= cur[j + 1] {
                (next[j], SKIP_REF)
            } else {
                (cur[j + 1], SKIP_PRED)
            };
            cur[j] = v;
            dirs.set(i, j, d);
        }
        core::mem::swap(&mut cur, &mut next);
    }
    let mut pairs = Vec::with_capacity(next[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        match dirs.get(i, j) {
            MATCH => {
                pairs.push((i, j));
                i += 1;
                j += 1;
            }
            SKIP_REF => i += 1,
            _ => j += 1,
        }
    }
    Matching { pairs, ref_len: n, pred_len: m }
}

pub fn match_notes(reference: &Score, prediction: &Score) -> Matching {
    let a: Vec<u8> = reference.flat_notes().iter().map(|(_, n)| n.pitch).collect();
    let b: Vec<u8> = prediction.flat_notes().iter().map(|(_, n)| n.pitch).collect();
    match_pitches(&a, &b)
}

/// Binary-attribute confusion counts with the reference as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    fn add(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    fn merge(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    /// F1 in percent; 100 when there are no positives on either side.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            100.0
        } else {
            100.0 * (2 * self.tp) as f64 / denom as f64
        }
    }
}

/// Raw counts behind a [`MetricReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricCounts {
    pub reference_notes: usize,
    pub predicted_notes: usize,
    pub matched: usize,
    pub duration_errors: usize,
    pub staff_errors: usize,
    pub stem_errors: usize,
    pub spelling_errors: usize,
    pub grace: Confusion,
    pub staccato: Confusion,
    pub trill: Confusion,
}

impl MetricCounts {
    pub fn merge(&mut self, o: &MetricCounts) {
        self.reference_notes += o.reference_notes;
        self.predicted_notes += o.predicted_notes;
        self.matched += o.matched;
        self.duration_errors += o.duration_errors;
        self.staff_errors += o.staff_errors;
        self.stem_errors += o.stem_errors;
        self.spelling_errors += o.spelling_errors;
        self.grace.merge(&o.grace);
        self.staccato.merge(&o.staccato);
        self.trill.merge(&o.trill);
    }

    pub fn report(&self) -> MetricReport {
        let pct = |num: usize, den: usize| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
        MetricReport {
            e_miss: pct(self.reference_notes - self.matched, self.reference_notes),
            e_extra: pct(self.predicted_notes - self.matched, self.predicted_notes),
            e_duration: pct(self.duration_errors, self.matched),
            e_staff: pct(self.staff_errors, self.matched),
            e_stem: pct(self.stem_errors, self.matched),
            e_spell: pct(self.spelling_errors, self.matched),
            f1_grace: self.grace.f1(),
            f1_staccato: self.staccato.f1(),
            f1_trill: self.trill.f1(),
            matched: self.matched,
        }
    }
}

/// Error percentages and ornament F1 scores, all in [0, 100].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    pub e_miss: f64,
    pub e_extra: f64,
    pub e_duration: f64,
    pub e_staff: f64,
    pub e_stem: f64,
    pub e_spell: f64,
    pub f1_grace: f64,
    pub f1_staccato: f64,
    pub f1_trill: f64,
    pub matched: usize,
}

impl MetricReport {
    /// The report of a score compared with itself.
    pub fn perfect(matched: usize) -> Self {
        Self { f1_grace: 100.0, f1_staccato: 100.0, f1_trill: 100.0, matched, ..Self::default() }
    }
}

pub fn count_matched(reference: &[(Tick, ScoreNote)], prediction: &[(Tick, ScoreNote)], matching: &Matching) -> MetricCounts {
    let mut c = MetricCounts {
        reference_notes: reference.len(),
        predicted_notes: prediction.len(),
        matched: matching.pairs.len(),
        ..MetricCounts::default()
    };
    for &(i, j) in &matching.pairs {
        let (r, p) = (&reference[i].1, &prediction[j].1);
        c.duration_errors += (r.duration != p.duration) as usize;
        c.staff_errors += (r.staff != p.staff) as usize;
        c.stem_errors += (r.stem != p.stem) as usize;
        let (rs, _) = spell(r.pitch, r.accidental);
        let (ps, _) = spell(p.pitch, p.accidental);
        c.spelling_errors += ((rs.step, rs.alter) != (ps.step, ps.alter)) as usize;
        c.grace.add(r.grace, p.grace);
        c.staccato.add(r.staccato, p.staccato);
        c.trill.add(r.trill, p.trill);
    }
    c
}

pub fn score_counts(reference: &Score, prediction: &Score) -> (MetricCounts, Matching) {
    let a = reference.flat_notes();
    let b = prediction.flat_notes();
    let pa: Vec<u8> = a.iter().map(|(_, n)| n.pitch).collect();
    let pb: Vec<u8> = b.iter().map(|(_, n)| n.pitch).collect();
    let m = match_pitches(&pa, &pb);
    (count_matched(&a, &b, &m), m)
}

pub fn score_similarity(reference: &Score, prediction: &Score) -> MetricReport {
    score_counts(reference, prediction).0.report()
}

/// Corpus report: per-piece reports averaged with each piece weighted by
/// its reference note count. `matched` is summed. With no reference notes
/// anywhere the pieces are weighted equally.
pub fn aggregate<'a>(pieces: impl IntoIterator<Item = &'a MetricCounts>) -> MetricReport {
    let pieces: Vec<(MetricReport, usize)> = pieces.into_iter().map(|c| (c.report(), c.reference_notes)).collect();
    if pieces.is_empty() {
        return MetricReport::perfect(0);
    }
    let total: usize = pieces.iter().map(|(_, w)| w).sum();
    let weight = |w: usize| if total == 0 { 1.0 / pieces.len() as f64 } else { w as f64 / total as f64 };
    let mut out = MetricReport { matched: pieces.iter().map(|(r, _)| r.matched).sum(), ..MetricReport::default() };
    for (r, w) in &pieces {
        let w = weight(*w);
        out.e_miss += w * r.e_miss;
        out.e_extra += w * r.e_extra;
        out.e_duration += w * r.e_duration;
        out.e_staff += w * r.e_staff;
        out.e_stem += w * r.e_stem;
        out.e_spell += w * r.e_spell;
        out.f1_grace += w * r.f1_grace;
        out.f1_staccato += w * r.f1_staccato;
        out.f1_trill += w * r.f1_trill;
    }
    out
}
