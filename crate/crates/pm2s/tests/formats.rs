#[path = "../../core/tests/common/mod.rs"]
mod common;

use pm2s::beats::parse_beats;
use pm2s::midi::{parse_midi, write_midi};
use pm2s::musicxml::{parse_musicxml, write_musicxml, ParseOptions};
use pm2s::tokens::TokenFile;
use pm2s_core::reconstruct::{decode_score, split_and_tie};
use pm2s_core::tokenizer::{encode_performance, encode_score};
use pm2s_core::{Performance, PerformanceNote, QuantGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TICK_SECONDS: f64 = 60.0 / (120.0 * 480.0);

/// Every parsed note pairs with a distinct original of the same pitch whose
/// onset and offset are within a tick; notes closer than a tick may swap.
fn assert_midi_close(a: &Performance, b: &Performance) {
    assert_eq!(a.len(), b.len());
    let close = |x: &PerformanceNote, y: &PerformanceNote| {
        x.pitch == y.pitch
            && x.velocity.max(1) == y.velocity
            && (x.onset - y.onset).abs() < 1.05e-3
            && ((x.offset() - y.offset()).abs() < 1.05e-3 || (x.duration < TICK_SECONDS && y.duration <= 1.05 * TICK_SECONDS))
    };
    let mut used = vec![false; a.len()];
    for y in b.notes() {
        let i = (0..a.len()).find(|&i| !used[i] && close(&a.notes()[i], y)).unwrap_or_else(|| panic!("no original for {y:?}"));
        used[i] = true;
    }
}

#[test]
fn hundred_random_notes_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let perf = common::random_performance(&mut rng, 100);
    let (back, _) = parse_midi(&write_midi(&perf)).unwrap();
    assert_midi_close(&perf, &back);
}

#[test]
fn grid_aligned_note_is_exact() {
    let perf = Performance::new(vec![PerformanceNote::new(60, 0.5, 0.25, 90).unwrap()]);
    let (back, report) = parse_midi(&write_midi(&perf)).unwrap();
    assert_eq!(back, perf);
    assert_eq!(report, Default::default());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn midi_roundtrip_within_a_tick(seed in any::<u64>(), n in 0usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perf = common::random_performance(&mut rng, n);
        let (back, _) = parse_midi(&write_midi(&perf)).unwrap();
        assert_midi_close(&perf, &back);
    }

    #[test]
    fn musicxml_roundtrip_is_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let score = common::random_score(&mut rng, 6, 8);
        let (text, _) = write_musicxml(&score);
        let (back, report) = parse_musicxml(&text, &ParseOptions::default()).unwrap();
        prop_assert_eq!(back, score);
        prop_assert_eq!(report.lossy_conversions, 0);
    }

    #[test]
    fn decoded_tokens_survive_musicxml(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let score = common::random_score(&mut rng, 6, 8);
        let seq = encode_score(&score).unwrap();
        let (decoded, mut r) = decode_score(&seq);
        let split = split_and_tie(&decoded, &mut r);
        let (back, _) = parse_musicxml(&write_musicxml(&split).0, &ParseOptions::default()).unwrap();
        prop_assert_eq!(encode_score(&back).unwrap(), seq);
    }

    #[test]
    fn token_files_roundtrip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = encode_score(&common::random_score(&mut rng, 4, 8)).unwrap();
        let file = TokenFile::from_json(&TokenFile::from_output(&seq).to_json()).unwrap();
        prop_assert_eq!(file.to_output().unwrap(), seq);
        let g = QuantGrid::with_epsilon(0.02);
        let input = encode_performance(&common::random_performance(&mut rng, 30), &g).unwrap();
        let file = TokenFile::from_json(&TokenFile::from_input(&input, &g).to_json()).unwrap();
        prop_assert_eq!(file.grid(), g);
        prop_assert_eq!(file.to_input().unwrap(), input);
    }
}

#[test]
fn beats_in_both_formats() {
    let json = parse_beats("[0.0, 0.5, 1.0]").unwrap();
    let csv = parse_beats("time,index\n1.0,2\n0.0,0\n0.5,1\n").unwrap();
    assert_eq!(json, csv);
    assert_eq!(parse_beats("0.0,0\n0.5,1\n1.0,2\n").unwrap(), json);
    assert!(parse_beats("[1.0, 0.5]").is_err());
    assert!(parse_beats("[]").is_err());
    assert!(parse_beats("0.0,x\n").is_err());
}

#[test]
fn token_file_errors() {
    assert!(TokenFile::from_json("{").is_err());
    assert!(TokenFile::from_json(r#"{"kind":"other","streams":[],"tokens":{}}"#).is_err());
    let seq = encode_score(&common::random_score(&mut ChaCha8Rng::seed_from_u64(1), 2, 3)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&TokenFile::from_output(&seq).to_json()).unwrap();
    v["tokens"]["pitch"][0] = 300.into();
    assert!(TokenFile::from_json(&v.to_string()).and_then(|f| f.to_output()).is_err());
    v["tokens"]["pitch"] = serde_json::json!([]);
    assert!(TokenFile::from_json(&v.to_string()).and_then(|f| f.to_output()).is_err());
}
