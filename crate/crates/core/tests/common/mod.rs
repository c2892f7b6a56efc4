#![allow(dead_code)]

use pm2s_core::{Accidental, Measure, Performance, PerformanceNote, Score, ScoreNote, Staff, Stem};
use rand::Rng;

const COMMON_LENGTHS: [u32; 11] = [24, 36, 48, 60, 72, 84, 96, 108, 120, 132, 144];

/// A random score whose every measure has notes, and whose notes stay
/// inside their measure.
pub fn random_score<R: Rng>(rng: &mut R, max_measures: usize, max_notes: usize) -> Score {
    let measures = (0..rng.random_range(1..=max_measures))
        .map(|_| {
            let length = if rng.random_bool(0.5) {
                COMMON_LENGTHS[rng.random_range(0..COMMON_LENGTHS.len())]
            } else {
                rng.random_range(1..=144)
            };
            let notes = (0..rng.random_range(1..=max_notes)).map(|_| random_note(rng, length)).collect();
            Measure::new(length, notes)
        })
        .collect();
    Score::new(measures)
}

pub fn random_note<R: Rng>(rng: &mut R, length: u32) -> ScoreNote {
    let onset = rng.random_range(0..length);
    let grace = rng.random_bool(0.1);
    let duration = if grace { 0 } else { rng.random_range(1..=(length - onset).min(96)) };
    let mut n = ScoreNote::new(rng.random_range(21..=108), onset, duration);
    n.grace = grace;
    n.staff = if rng.random_bool(0.5) { Staff::Upper } else { Staff::Lower };
    n.voice = rng.random_range(1..=8);
    n.stem = Stem::ALL[rng.random_range(0..3)];
    n.accidental = Accidental::ALL[rng.random_range(0..6)];
    n.trill = rng.random_bool(0.15);
    n.staccato = rng.random_bool(0.15);
    n
}

pub fn random_performance<R: Rng>(rng: &mut R, n: usize) -> Performance {
    Performance::new(
        (0..n)
            .map(|_| {
                let onset = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..30.0) };
                PerformanceNote::new(rng.random_range(21..=108), onset, rng.random_range(0.01..4.0), rng.random_range(1..=127)).unwrap()
            })
            .collect(),
    )
}

/// A small alignment problem: beat times, performance (pitch, onset) in
/// onset order and score (pitch, interval).
pub struct MicroInstance {
    pub beats: Vec<f64>,
    pub perf: Vec<(u8, f64)>,
    pub score: Vec<(u8, usize)>,
}

const MICRO_PITCHES: [u8; 4] = [60, 62, 64, 65];

/// Score notes sit in beat intervals; each is played with timing noise
/// that sometimes crosses a beat. Some notes are dropped and some extra
/// ones played. Instances with more than `max_movable` notes near a
/// boundary are redrawn.
pub fn micro_instance<R: Rng>(rng: &mut R, max_movable: usize, window: f64) -> MicroInstance {
    loop {
        let b = rng.random_range(3..=6);
        let mut beats = vec![0.0];
        for _ in 1..b {
            let last = *beats.last().unwrap();
            beats.push(last + rng.random_range(0.3..0.8));
        }
        let end = beats[b - 1] + 0.5;
        let mut score = Vec::new();
        let mut perf = Vec::new();
        for k in 0..b {
            let hi = if k + 1 < b { beats[k + 1] } else { end };
            for _ in 0..rng.random_range(0..=3) {
                let p = MICRO_PITCHES[rng.random_range(0..4)];
                score.push((p, k));
                if rng.random_bool(0.1) {
                    continue;
                }
                let onset: f64 = match rng.random_range(0..10) {
                    0 | 1 => beats[k] - rng.random_range(0.0..0.06),
                    2 | 3 => beats[k] + rng.random_range(0.0..0.06),
                    4 => hi + rng.random_range(-0.06..0.0),
                    _ => rng.random_range(beats[k]..hi),
                };
                perf.push((p, onset.max(0.0)));
            }
        }
        for _ in 0..rng.random_range(0..=2) {
            perf.push((MICRO_PITCHES[rng.random_range(0..4)], rng.random_range(0.0..end)));
        }
        perf.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let inst = MicroInstance { beats, perf, score };
        if inst.movable(window).len() <= max_movable {
            return inst;
        }
    }
}

impl MicroInstance {
    pub fn initial(&self) -> Vec<usize> {
        let onsets: Vec<f64> = self.perf.iter().map(|p| p.1).collect();
        pm2s_core::align::partition_by_beats(&onsets, &self.beats)
    }

    /// Indices of notes with at least one legal move, with their targets.
    pub fn movable(&self, window: f64) -> Vec<(usize, Vec<usize>)> {
        let init = self.initial();
        self.perf
            .iter()
            .enumerate()
            .map(|(i, &(_, o))| (i, pm2s_core::align::candidate_moves(o, init[i], &self.beats, window)))
            .filter(|(_, c)| !c.is_empty())
            .collect()
    }

    pub fn mismatch(&self, assignment: &[usize]) -> usize {
        let tagged: Vec<(u8, usize)> = self.perf.iter().zip(assignment).map(|(&(p, _), &k)| (p, k)).collect();
        pm2s_core::align::mismatch_count(self.beats.len(), &tagged, &self.score)
    }

    /// Fewest mismatches over every combination of legal moves.
    pub fn brute_force_min(&self, window: f64) -> usize {
        let movable = self.movable(window);
        let mut assignment = self.initial();
        let mut best = usize::MAX;
        fn go(inst: &MicroInstance, movable: &[(usize, Vec<usize>)], a: &mut Vec<usize>, best: &mut usize) {
            let Some(((i, targets), rest)) = movable.split_first() else {
                *best = (*best).min(inst.mismatch(a));
                return;
            };
            go(inst, rest, a, best);
            let keep = a[*i];
            for &t in targets {
                a[*i] = t;
                go(inst, rest, a, best);
            }
            a[*i] = keep;
        }
        go(self, &movable, &mut assignment, &mut best);
        best
    }
}

impl MicroInstance {
    /// Fewest mismatches over every assignment reachable by a sequence of
    /// legal moves, each lowering the mismatch count of both intervals it
    /// touches at the time it is made.
    pub fn reachable_min(&self, window: f64) -> usize {
        use std::collections::{BTreeSet, VecDeque};
        let b = self.beats.len();
        let balance = |a: &[usize]| {
            let mut d = vec![[0i32; 128]; b];
            for (&(p, _), &k) in self.perf.iter().zip(a) {
                d[k][p as usize] += 1;
            }
            for &(p, k) in &self.score {
                d[k][p as usize] -= 1;
            }
            d
        };
        let start = self.initial();
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        let mut best = usize::MAX;
        while let Some(a) = queue.pop_front() {
            best = best.min(self.mismatch(&a));
            let d = balance(&a);
            for (i, &(p, o)) in self.perf.iter().enumerate() {
                for t in pm2s_core::align::candidate_moves(o, a[i], &self.beats, window) {
                    if d[a[i]][p as usize] > 0 && d[t][p as usize] < 0 {
                        let mut next = a.clone();
                        next[i] = t;
                        if seen.insert(next.clone()) {
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        best
    }
}

/// Largest order-preserving matching of equal pitches, by trying every
/// subset of the reference.
pub fn brute_force_matching(reference: &[u8], prediction: &[u8]) -> usize {
    let n = reference.len();
    (0u32..1 << n)
        .filter(|mask| {
            let mut it = prediction.iter();
            (0..n).filter(|i| mask >> i & 1 == 1).all(|i| it.any(|&p| p == reference[i]))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Every pitch sequence over `alphabet` with length up to `max_len`.
pub fn all_sequences(alphabet: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<u8>| {
                alphabet.iter().map(move |&a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Checks that `pairs` is a valid order-preserving matching of equal pitches.
pub fn valid_matching(reference: &[u8], prediction: &[u8], pairs: &[(usize, usize)]) -> bool {
    pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
        && pairs.iter().all(|&(i, j)| i < reference.len() && j < prediction.len() && reference[i] == prediction[j])
}

/// Independent random distributions for every output stream.
pub fn random_prediction<R: Rng>(rng: &mut R) -> pm2s_core::loss::PredictionFrame {
    let dists = pm2s_core::tokenizer::OUTPUT_VOCAB.map(|v| random_dist(rng, v as usize));
    pm2s_core::loss::PredictionFrame::new(dists).unwrap()
}

pub fn random_dist<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// The same prediction with every stream but the space stream redrawn.
pub fn perturb_non_space<R: Rng>(rng: &mut R, p: &pm2s_core::loss::PredictionFrame) -> pm2s_core::loss::PredictionFrame {
    use pm2s_core::tokenizer::{OutputStream, OUTPUT_VOCAB};
    let mut i = 0;
    let dists = OUTPUT_VOCAB.map(|v| {
        let d = if i + 1 == OUTPUT_VOCAB.len() { p.stream(OutputStream::ALL[i]).to_vec() } else { random_dist(rng, v as usize) };
        i += 1;
        d
    });
    pm2s_core::loss::PredictionFrame::new(dists).unwrap()
}
