mod common;

use pm2s_core::reconstruct::{decode_score, split_and_tie};
use pm2s_core::tokenizer::{
    decode_performance, dequantize_velocity, encode_performance, encode_score, flatten_score, quantize_velocity, OutputFrame,
    OutputSequence, OUTPUT_VOCAB,
};
use pm2s_core::QuantGrid;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// The quantizer written out directly from its definition.
fn oracle_token(x: f64, eps: f64) -> u8 {
    if x >= 8.0 {
        return 199;
    }
    (199.0 * (1.0 + x / eps).ln() / (1.0 + 8.0 / eps).ln()).round().clamp(0.0, 199.0) as u8
}

#[test]
fn every_token_roundtrips() {
    let g = QuantGrid::default();
    for t in 0..200u8 {
        assert_eq!(g.quantize(g.dequantize(t).unwrap()).unwrap(), t, "token {t}");
    }
    for v in 0..8u8 {
        assert_eq!(quantize_velocity(dequantize_velocity(v)), v);
    }
}

#[test]
fn known_values() {
    let g = QuantGrid::default();
    assert_eq!(g.quantize(0.0).unwrap(), 0);
    assert_eq!(g.quantize(8.0).unwrap(), 199);
    assert_eq!(g.quantize(100.0).unwrap(), 199);
    assert_eq!(g.dequantize(199).unwrap(), 8.0);
    assert!(g.quantize(-0.1).is_err());
    assert!(g.quantize(f64::NAN).is_err());
    assert!(g.dequantize(200).is_err());
    assert_eq!(quantize_velocity(0), 0);
    assert_eq!(quantize_velocity(127), 7);
}

proptest! {
    #[test]
    fn quantizer_matches_definition(x in 0.0f64..20.0, eps in prop::sample::select(vec![0.001, 0.01, 0.05, 0.1])) {
        let g = QuantGrid::with_epsilon(eps);
        prop_assert_eq!(g.quantize(x).unwrap(), oracle_token(x, eps));
    }

    #[test]
    fn quantizer_is_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let g = QuantGrid::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(g.quantize(lo).unwrap() <= g.quantize(hi).unwrap());
    }

    #[test]
    fn dequantized_value_lies_in_bucket(x in 0.0f64..7.9) {
        let g = QuantGrid::default();
        let t = g.quantize(x).unwrap();
        let y = g.dequantize(t).unwrap();
        prop_assert!((y - x).abs() <= g.bucket_width(t));
    }

    #[test]
    fn velocity_bucket_contains_value(v in 0u8..=127) {
        let t = quantize_velocity(v);
        prop_assert!(t < 8);
        prop_assert_eq!(t, v / 16);
        prop_assert!(dequantize_velocity(t).abs_diff(v) <= 8);
    }

    #[test]
    fn performance_frames_match_notes(seed in any::<u64>(), n in 0usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perf = common::random_performance(&mut rng, n);
        let g = QuantGrid::default();
        let seq = encode_performance(&perf, &g).unwrap();
        prop_assert_eq!(seq.len(), perf.len());
        let back = decode_performance(&seq, &g).unwrap();
        prop_assert_eq!(back.len(), perf.len());
        // notes within one onset bucket decode as simultaneous and may
        // reorder; after that the encoding is a fixed point
        let again = encode_performance(&back, &g).unwrap();
        let key = |s: &pm2s_core::tokenizer::InputSequence| {
            let mut k: Vec<(u8, u8, u8)> = s.frames.iter().map(|f| (f.pitch, f.duration, f.velocity)).collect();
            k.sort_unstable();
            k
        };
        prop_assert_eq!(key(&again), key(&seq));
        prop_assert_eq!(encode_performance(&decode_performance(&again, &g).unwrap(), &g).unwrap(), again);
    }

    #[test]
    fn score_decode_inverts_encode(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let score = common::random_score(&mut rng, 6, 8);
        let seq = encode_score(&score).unwrap();
        prop_assert_eq!(seq.len(), score.note_count());
        let (decoded, report) = decode_score(&seq);
        prop_assert_eq!(report.unrepresentable_events, 0);
        // all lengths but the last are carried by the following measure
        let n = score.measures.len();
        for (a, b) in score.measures[..n - 1].iter().zip(&decoded.measures) {
            prop_assert_eq!(a, b);
        }
        let mut r = report;
        let split = split_and_tie(&decoded, &mut r);
        prop_assert_eq!(encode_score(&split).unwrap(), seq);
    }

    #[test]
    fn frames_are_in_vocabulary(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = encode_score(&common::random_score(&mut rng, 4, 8)).unwrap();
        for f in &seq.frames {
            for (t, v) in f.tokens().iter().zip(OUTPUT_VOCAB) {
                prop_assert!((*t as u16) < v);
            }
            prop_assert_eq!(OutputFrame::from_tokens(f.tokens()).unwrap(), *f);
        }
    }

    #[test]
    fn compound_frames_are_shorter_than_flat(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let score = common::random_score(&mut rng, 6, 8);
        let frames = encode_score(&score).unwrap().len();
        prop_assert_eq!(frames, score.note_count());
        prop_assert!(flatten_score(&score).len() >= 6 * frames);
    }
}

#[test]
fn space_frames_decode_to_nothing() {
    let seq = OutputSequence::new(vec![OutputFrame::space(); 5]);
    let (s, _) = decode_score(&seq);
    assert_eq!(s.note_count(), 0);
}
