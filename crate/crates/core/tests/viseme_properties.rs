mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robohead_core::viseme::{
    force_labial_closure, render_timeline, ClosureParams, PhonemeSegment, RenderParams, Transcript,
    VisemeTable, VisemeTrack,
};

fn labial_peak(frames: &[robohead_core::viseme::MorphWeights], table: &VisemeTable, seg: &PhonemeSegment) -> f64 {
    let class = table.lookup(&seg.phoneme).unwrap().id as usize;
    frames
        .iter()
        .filter(|f| f.timestamp >= seg.start && f.timestamp <= seg.end)
        .map(|f| f.viseme_weights[class])
        .fold(0.0, f64::max)
}

#[test]
fn randomized_transcripts_render_convex_frames_and_close_lips() {
    let table = VisemeTable::default();
    let params = RenderParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut labials_checked = 0;
    for _ in 0..500 {
        let t = support::random_transcript(&mut rng, &table);
        let frames = render_timeline(&t, &[], &table, params).unwrap();
        for f in &frames {
            assert!(f.viseme_weights.iter().all(|&w| w >= 0.0));
            if !f.is_silent() {
                assert!((f.viseme_sum() - 1.0).abs() < 1e-9, "sum {} at {}", f.viseme_sum(), f.timestamp);
            }
        }
        for seg in t.segments() {
            if table.lookup(&seg.phoneme).unwrap().is_labial && seg.duration() > 2.0 / params.frame_rate {
                labials_checked += 1;
                let peak = labial_peak(&frames, &table, seg);
                assert!(peak >= 0.99, "labial {seg:?} peaks at {peak} in {t:?}");
            }
        }
    }
    assert!(labials_checked > 100);
}

#[test]
fn closure_is_needed_for_short_labials() {
    // Without forcing, a short labial between long vowels never dominates.
    let table = VisemeTable::default();
    let t = Transcript::new(vec![
        PhonemeSegment::new("a", 0.0, 0.3),
        PhonemeSegment::new("p", 0.3, 0.33),
        PhonemeSegment::new("o", 0.33, 0.6),
    ])
    .unwrap();
    let track = VisemeTrack::new(&t, &table).unwrap();
    let p = table.lookup("p").unwrap().id as usize;
    assert!(track.weights_at(0.315, 2.0).viseme_weights[p] < 0.99);
    let closed = force_labial_closure(&t, &table, ClosureParams::default()).unwrap();
    let track = VisemeTrack::new(&closed, &table).unwrap();
    assert!(track.weights_at(0.315, 2.0).viseme_weights[p] >= 0.99);
}

fn transcript_strategy() -> impl Strategy<Value = Transcript> {
    let phonemes = prop::sample::select(vec!["a", "e", "o", "t", "s", "k", "m", "b", "p", "f", "v", "l", "r", "w"]);
    prop::collection::vec((phonemes, 0.01f64..0.4, prop::bool::weighted(0.1)), 1..12).prop_map(|parts| {
        let mut t = 0.0;
        let mut segs = Vec::new();
        for (p, d, gap) in parts {
            if gap {
                t += 0.05;
            }
            segs.push(PhonemeSegment::new(p, t, t + d));
            t += d;
        }
        Transcript::new(segs).unwrap()
    })
}

proptest! {
    #[test]
    fn closure_keeps_transcript_contiguous_and_ordered(t in transcript_strategy(), scale in 1.0f64..3.0) {
        let table = VisemeTable::default();
        let params = ClosureParams { bandwidth_scale: scale, ..ClosureParams::default() };
        let closed = force_labial_closure(&t, &table, params).unwrap();
        prop_assert_eq!(closed.span(), t.span());
        for w in closed.segments().windows(2) {
            prop_assert!(w[0].end <= w[1].start + 1e-12);
        }
        prop_assert!(closed.segments().iter().all(|s| s.end > s.start));
    }

    #[test]
    fn labial_weight_is_full_inside_original_labials(t in transcript_strategy(), scale in 1.0f64..3.0) {
        let table = VisemeTable::default();
        let params = ClosureParams { bandwidth_scale: scale, ..ClosureParams::default() };
        let closed = force_labial_closure(&t, &table, params).unwrap();
        let track = VisemeTrack::new(&closed, &table).unwrap();
        for seg in t.segments() {
            let class = table.lookup(&seg.phoneme).unwrap();
            if !class.is_labial {
                continue;
            }
            let mid = 0.5 * (seg.start + seg.end);
            let w = track.weights_at(mid, scale).viseme_weights[class.id as usize];
            prop_assert!(w >= 0.99, "{:?} at {}: {}", seg, mid, w);
        }
    }

    #[test]
    fn weights_are_a_distribution(t in transcript_strategy(), u in 0.0f64..1.0, scale in 0.5f64..3.0) {
        let table = VisemeTable::default();
        let (a, b) = t.span().unwrap();
        let w = VisemeTrack::new(&t, &table).unwrap().weights_at(a + u * (b - a), scale);
        prop_assert!(w.viseme_weights.iter().all(|&x| x >= 0.0));
        prop_assert!(w.is_silent() || (w.viseme_sum() - 1.0).abs() < 1e-9);
    }
}
