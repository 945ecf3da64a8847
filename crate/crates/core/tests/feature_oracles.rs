mod support;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robohead_core::features::{
    describe, fit_similarity, hog, lbp_code, lbph, pca_fit, register_and_crop, Descriptor, FeatureConfig,
    GrayImage, LandmarkSet, SimilarityTransform, CROP_SIZE, LANDMARK_COUNT, LBP_BINS, UNIFORM_BIN,
};

#[test]
fn default_lbph_has_3776_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let crop = support::random_image(&mut rng, CROP_SIZE, CROP_SIZE);
    let blocks = describe(&crop, &FeatureConfig::default()).unwrap();
    let lbph = blocks.iter().find(|b| b.descriptor == Descriptor::Lbph).unwrap();
    assert_eq!(lbph.dimension(), 3776);
    assert_eq!(lbph.dimension(), 8 * 8 * LBP_BINS);
}

#[test]
fn lbp_codes_match_brute_force_on_random_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let mut patch = [[0u8; 3]; 3];
        for row in &mut patch {
            for v in row.iter_mut() {
                // Narrow range so ties with the centre are common.
                *v = if rng.random_bool(0.3) { rng.random_range(100..103) } else { rng.random() };
            }
        }
        let image = GrayImage::from_fn(3, 3, |x, y| patch[y][x]);
        assert_eq!(lbp_code(&image, 1, 1), support::lbp_oracle(patch), "{patch:?}");
    }
}

#[test]
fn uniform_table_matches_transition_counting() {
    let circular = |c: u8| (0..8).filter(|&i| (c >> i & 1) != (c >> ((i + 1) % 8) & 1)).count();
    let uniform: Vec<u8> = (0..=255u8).filter(|&c| circular(c) <= 2).collect();
    assert_eq!(uniform.len(), 58);
    for code in 0..=255u8 {
        let expected = uniform.iter().position(|&u| u == code).unwrap_or(58);
        assert_eq!(UNIFORM_BIN[code as usize] as usize, expected, "code {code:08b}");
    }
}

#[test]
fn hog_of_constant_image_is_zero() {
    for value in [0u8, 77, 255] {
        let image = GrayImage::filled(CROP_SIZE, CROP_SIZE, value);
        let h = hog(&image, 8, 59).unwrap();
        assert_eq!(h.dimension(), 8 * 8 * 59);
        assert!(h.values.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn lbph_windows_each_sum_to_interior_pixels() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let crop = support::random_image(&mut rng, CROP_SIZE, CROP_SIZE);
    let h = lbph(&crop, 8).unwrap();
    for w in h.values.chunks(LBP_BINS) {
        assert_eq!(w.iter().sum::<f64>(), 196.0);
    }
}

fn covariance_spectrum(samples: &[Vec<f64>]) -> Vec<f64> {
    let n = samples.len();
    let d = samples[0].len();
    let x = DMatrix::from_fn(n, d, |i, j| samples[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let mut ev: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

fn anisotropic_samples(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|j| rng.random_range(-1.0..1.0) * 1.0 / (1.0 + j as f64)).collect())
        .collect()
}

#[test]
fn pca_picks_minimal_k_with_orthonormal_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Both the feature-space and the sample-space route.
    for (n, d) in [(200, 12), (15, 40)] {
        let samples = anisotropic_samples(&mut rng, n, d);
        let model = pca_fit(&samples, 0.95).unwrap();
        let spectrum = covariance_spectrum(&samples);
        let total: f64 = spectrum.iter().sum();
        let k = model.components();
        let kept: f64 = spectrum[..k].iter().sum();
        let short: f64 = spectrum[..k - 1].iter().sum();
        assert!(kept / total >= 0.95 - 1e-12);
        assert!(short / total < 0.95, "k = {k} is not minimal");
        assert!((model.retained_fraction() - kept / total).abs() < 1e-9);
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = model.component(a).iter().zip(model.component(b)).map(|(x, y)| x * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "<v{a}, v{b}> = {dot}");
            }
        }
    }
}

#[test]
fn isotropic_cloud_keeps_every_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<Vec<f64>> = (0..3000).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    assert_eq!(pca_fit(&samples, 0.95).unwrap().components(), 3);
}

#[test]
fn reconstruction_error_is_the_discarded_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let samples = anisotropic_samples(&mut rng, 300, 10);
    let model = pca_fit(&samples, 0.9).unwrap();
    let spectrum = covariance_spectrum(&samples);
    let discarded: f64 = spectrum[model.components()..].iter().sum();
    let mse: f64 = samples
        .iter()
        .map(|x| {
            let back = model.reconstruct(&model.project(x).unwrap().values).unwrap();
            x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        / samples.len() as f64;
    assert!((mse - discarded).abs() < 1e-9 * (1.0 + discarded), "{mse} vs {discarded}");
}

fn landmark_strategy() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-50.0f64..50.0), LANDMARK_COUNT)
}

proptest! {
    #[test]
    fn projection_is_idempotent(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = anisotropic_samples(&mut rng, 40, 8);
        let model = pca_fit(&samples, 0.9).unwrap();
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let once = model.reconstruct(&model.project(&x).unwrap().values).unwrap();
        let twice = model.reconstruct(&model.project(&once).unwrap().values).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn similarity_fit_recovers_a_known_transform(
        points in landmark_strategy(),
        scale in 0.2f64..5.0,
        rotation in -3.0f64..3.0,
        tx in -100.0f64..100.0,
        ty in -100.0f64..100.0,
    ) {
        let t = SimilarityTransform { scale, rotation, translation: [tx, ty] };
        let source = LandmarkSet::new(points.clone()).unwrap();
        let moved = LandmarkSet::new(points.iter().map(|&p| t.apply(p)).collect()).unwrap();
        let fit = fit_similarity(&source, &moved).unwrap();
        for &p in &points {
            let (a, b) = (fit.apply(p), t.apply(p));
            prop_assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
        }
        // Fitting the other way gives the inverse.
        let back = fit_similarity(&moved, &source).unwrap();
        for &p in &points {
            let q = back.apply(t.apply(p));
            prop_assert!((q[0] - p[0]).abs() < 1e-6 && (q[1] - p[1]).abs() < 1e-6);
        }
    }
}

/// Smooth test pattern so resampling twice stays close to resampling once.
fn pattern(x: f64, y: f64) -> u8 {
    (128.0 + 60.0 * (x / 9.0).sin() + 50.0 * (y / 13.0).cos()).round() as u8
}

fn face_landmarks(rng: &mut ChaCha8Rng, cx: f64, cy: f64, r: f64) -> Vec<[f64; 2]> {
    (0..LANDMARK_COUNT)
        .map(|i| {
            let a = i as f64 / LANDMARK_COUNT as f64 * std::f64::consts::TAU;
            let jitter = rng.random_range(0.7..1.0);
            [cx + r * jitter * a.cos(), cy + r * jitter * a.sin()]
        })
        .collect()
}

#[test]
fn cropping_is_invariant_to_a_similarity_of_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points = face_landmarks(&mut rng, 160.0, 160.0, 70.0);
    let landmarks = LandmarkSet::new(points.clone()).unwrap();
    let reference = LandmarkSet::mean_reference(std::slice::from_ref(&landmarks), CROP_SIZE).unwrap();
    let image = GrayImage::from_fn(320, 320, |x, y| pattern(x as f64, y as f64));
    let base = register_and_crop(&image, &landmarks, &reference).unwrap();
    assert!(base.is_clean());

    // Rotate and shrink the scene about the image centre; the crop must not change.
    let t = SimilarityTransform { scale: 0.8, rotation: 0.3, translation: [0.0, 0.0] };
    let about = |p: [f64; 2]| {
        let q = t.apply([p[0] - 160.0, p[1] - 160.0]);
        [q[0] + 160.0, q[1] + 160.0]
    };
    let inv = t.inverse();
    let moved_image = GrayImage::from_fn(320, 320, |x, y| {
        let q = inv.apply([x as f64 - 160.0, y as f64 - 160.0]);
        pattern(q[0] + 160.0, q[1] + 160.0)
    });
    let moved = LandmarkSet::new(points.iter().map(|&p| about(p)).collect()).unwrap();
    let crop = register_and_crop(&moved_image, &moved, &reference).unwrap();
    assert!(crop.is_clean());
    let diff: f64 = base
        .value
        .data()
        .iter()
        .zip(crop.value.data())
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum::<f64>()
        / (CROP_SIZE * CROP_SIZE) as f64;
    assert!(diff < 2.0, "mean absolute difference {diff}");
}

#[test]
fn recropping_a_crop_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points = face_landmarks(&mut rng, 100.0, 90.0, 50.0);
    let landmarks = LandmarkSet::new(points).unwrap();
    let reference = LandmarkSet::mean_reference(std::slice::from_ref(&landmarks), CROP_SIZE).unwrap();
    let image = GrayImage::from_fn(200, 200, |x, y| pattern(x as f64, y as f64));
    let once = register_and_crop(&image, &landmarks, &reference).unwrap().value;
    let twice = register_and_crop(&once, &reference, &reference).unwrap().value;
    let diff: f64 = once.data().iter().zip(twice.data()).map(|(&a, &b)| (a as f64 - b as f64).abs()).sum::<f64>()
        / (CROP_SIZE * CROP_SIZE) as f64;
    assert!(diff < 2.0, "mean absolute difference {diff}");
}

#[test]
fn out_of_frame_faces_are_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let points = face_landmarks(&mut rng, 10.0, 10.0, 50.0);
    let landmarks = LandmarkSet::new(points).unwrap();
    let reference = LandmarkSet::mean_reference(std::slice::from_ref(&landmarks), CROP_SIZE).unwrap();
    let image = GrayImage::filled(60, 60, 200);
    let crop = register_and_crop(&image, &landmarks, &reference).unwrap();
    assert!(!crop.is_clean());
    assert!(crop.value.data().contains(&0));
}
