mod common;

use pm2s_core::augment::{
    augment, duration_jitter, onset_jitter, seeded_rng, tempo_scale, transpose, AugmentConfig, AugmentError, MAX_TRANSPOSE, TEMPO_RANGE,
};
use pm2s_core::{Performance, Score};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(seed: u64) -> (Performance, Score) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (common::random_performance(&mut rng, 40), common::random_score(&mut rng, 4, 8))
}

fn bits(p: &Performance) -> Vec<(u8, u64, u64, u8)> {
    p.notes().iter().map(|n| (n.pitch, n.onset.to_bits(), n.duration.to_bits(), n.velocity)).collect()
}

fn same_order(a: &Performance, b: &Performance) -> bool {
    a.len() == b.len()
        && a.notes().iter().zip(b.notes()).all(|(x, y)| x.pitch == y.pitch)
        && b.notes().windows(2).all(|w| w[0].onset <= w[1].onset)
}

proptest! {
    #[test]
    fn octave_transpose_inverts(seed in any::<u64>(), up in any::<bool>()) {
        let (perf, score) = pair(seed);
        let k = if up { 12 } else { -12 };
        let (p, s, r) = transpose(&perf, &score, k).unwrap();
        prop_assert_eq!(r.octave_folds, 0);
        let (p2, s2, _) = transpose(&p, &s, -k).unwrap();
        prop_assert_eq!(p2, perf);
        prop_assert_eq!(s2, score);
    }

    #[test]
    fn transposed_pitches_shift_or_fold(seed in any::<u64>(), k in -MAX_TRANSPOSE..=MAX_TRANSPOSE) {
        let (perf, score) = pair(seed);
        let (_, s, _) = transpose(&perf, &score, k).unwrap();
        prop_assert_eq!(s.note_count(), score.note_count());
        let mut before: Vec<i32> = score.flat_notes().iter().map(|(_, n)| n.pitch as i32 + k).collect();
        let mut after: Vec<i32> = s.flat_notes().iter().map(|(_, n)| n.pitch as i32).collect();
        for p in &mut before {
            if *p > 127 { *p -= 12 } else if *p < 0 { *p += 12 }
        }
        before.sort_unstable();
        after.sort_unstable();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn tempo_scale_inverts(seed in any::<u64>(), lambda in TEMPO_RANGE.0..=TEMPO_RANGE.1) {
        let (perf, _) = pair(seed);
        let back = tempo_scale(&tempo_scale(&perf, lambda).unwrap(), 1.0 / lambda).unwrap();
        prop_assert!(same_order(&perf, &back));
        for (a, b) in perf.notes().iter().zip(back.notes()) {
            prop_assert!((a.onset - b.onset).abs() < 1e-9);
            prop_assert!((a.duration - b.duration).abs() < 1e-9);
        }
    }

    #[test]
    fn jitter_keeps_count_and_order(seed in any::<u64>(), spread in 0.0f64..=0.5, sigma in 0.0f64..=0.5) {
        let (perf, _) = pair(seed);
        let mut rng = seeded_rng(seed);
        let d = duration_jitter(&perf, spread, &mut rng).unwrap();
        prop_assert!(same_order(&perf, &d));
        // replay the draws: one uniform per note in canonical order
        let mut replay = seeded_rng(seed);
        let expected = Performance::new(
            perf.notes()
                .iter()
                .map(|n| {
                    let u: f64 = rand::Rng::random(&mut replay);
                    pm2s_core::PerformanceNote { duration: n.duration * (1.0 + spread * (2.0 * u - 1.0)), ..*n }
                })
                .collect(),
        );
        prop_assert_eq!(bits(&expected), bits(&d));
        let o = onset_jitter(&perf, sigma, &mut rng).unwrap();
        prop_assert!(same_order(&perf, &o));
        for (w, v) in perf.notes().windows(2).zip(o.notes().windows(2)) {
            let (gap, new) = (w[1].onset - w[0].onset, v[1].onset - v[0].onset);
            prop_assert!(new >= 0.5 * gap - 1e-9 && new <= 1.5 * gap + 1e-9);
        }
    }

    #[test]
    fn augment_is_reproducible(seed in any::<u64>()) {
        let (perf, score) = pair(seed);
        let cfg = AugmentConfig::sample(seed);
        let (a, sa, ra) = augment(&perf, &score, &cfg).unwrap();
        let (b, sb, rb) = augment(&perf, &score, &cfg).unwrap();
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(sa, sb);
        prop_assert_eq!(ra, rb);
        prop_assert_eq!(a.len(), perf.len());
    }
}

#[test]
fn seeds_change_the_noise() {
    let (perf, score) = pair(5);
    let a = augment(&perf, &score, &AugmentConfig { seed: 1, ..AugmentConfig::default() }).unwrap().0;
    let b = augment(&perf, &score, &AugmentConfig { seed: 2, ..AugmentConfig::default() }).unwrap().0;
    assert_ne!(bits(&a), bits(&b));
}

#[test]
fn out_of_range_parameters() {
    let (perf, score) = pair(0);
    assert_eq!(transpose(&perf, &score, 13).unwrap_err(), AugmentError::Transpose(13));
    assert!(tempo_scale(&perf, 0.0).is_err());
    assert!(tempo_scale(&perf, f64::INFINITY).is_err());
    assert!(duration_jitter(&perf, 0.6, &mut seeded_rng(0)).is_err());
    assert!(onset_jitter(&perf, -0.1, &mut seeded_rng(0)).is_err());
    for s in 0..50 {
        let c = AugmentConfig::sample(s);
        assert!(c.transpose_semitones.abs() <= 12);
        assert!((0.8..=1.2).contains(&c.tempo_lambda));
    }
}
