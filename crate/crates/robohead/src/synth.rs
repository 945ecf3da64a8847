//! Procedural face sequences for exercising the pipeline without a real dataset.
//!
//! Each subject performs every basic expression once. A sequence starts at the
//! neutral face and ramps linearly to the full expression; geometry (brows,
//! eyes, mouth) and expression-specific wrinkle texture both follow the ramp.
//! Every frame gets its own small similarity jitter and pixel noise.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use robohead_core::features::{GrayImage, LandmarkSet, SimilarityTransform, LANDMARK_COUNT};
use robohead_core::Expression;

use crate::error::{CliError, CliResult};
use crate::manifest::{expression_classes, DatasetManifest, ManifestEntry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub subjects: usize,
    pub frames: u32,
    pub size: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { subjects: 6, frames: 6, size: 160, seed: 0 }
    }
}

/// Per-subject appearance.
#[derive(Debug, Clone, Copy)]
struct Subject {
    skin: f64,
    background: f64,
    width: f64,
    height: f64,
    eye_gap: f64,
    brow_height: f64,
    mouth_width: f64,
}

impl Subject {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Subject {
            skin: rng.random_range(140.0..190.0),
            background: rng.random_range(40.0..90.0),
            width: rng.random_range(0.92..1.08),
            height: rng.random_range(0.94..1.06),
            eye_gap: rng.random_range(-2.0..2.0),
            brow_height: rng.random_range(-2.0..2.0),
            mouth_width: rng.random_range(-2.0..2.0),
        }
    }
}

/// Facial geometry controls; all zero is the neutral face.
#[derive(Debug, Clone, Copy, Default)]
struct Controls {
    brow_raise: f64,
    brow_inner_raise: f64,
    brow_squeeze: f64,
    eye_open: f64,
    mouth_widen: f64,
    mouth_open: f64,
    upper_lip_raise: f64,
    corner_lift: f64,
    lip_press: f64,
}

fn controls(expression: Expression, s: f64) -> Controls {
    let c = match expression {
        Expression::Joy => Controls { corner_lift: 6.0, mouth_widen: 4.0, eye_open: -1.0, ..Default::default() },
        Expression::Sadness => Controls { corner_lift: -5.0, brow_inner_raise: 5.0, eye_open: -1.0, ..Default::default() },
        Expression::Anger => Controls { brow_raise: -5.0, brow_squeeze: 4.0, lip_press: 0.7, ..Default::default() },
        Expression::Surprise => Controls { brow_raise: 8.0, eye_open: 3.0, mouth_open: 10.0, mouth_widen: -3.0, ..Default::default() },
        Expression::Fear => Controls {
            brow_raise: 5.0,
            brow_squeeze: 3.0,
            eye_open: 2.5,
            mouth_widen: 5.0,
            mouth_open: 3.0,
            ..Default::default()
        },
        Expression::Disgust => Controls { upper_lip_raise: 4.0, brow_raise: -3.0, corner_lift: -2.0, ..Default::default() },
        Expression::Neutral => Controls::default(),
    };
    Controls {
        brow_raise: s * c.brow_raise,
        brow_inner_raise: s * c.brow_inner_raise,
        brow_squeeze: s * c.brow_squeeze,
        eye_open: s * c.eye_open,
        mouth_widen: s * c.mouth_widen,
        mouth_open: s * c.mouth_open,
        upper_lip_raise: s * c.upper_lip_raise,
        corner_lift: s * c.corner_lift,
        lip_press: s * c.lip_press,
    }
}

/// 68 landmarks in face coordinates (origin between the eyes and mouth, y down).
fn face_shape(subject: &Subject, c: &Controls) -> Vec<[f64; 2]> {
    let mut p = Vec::with_capacity(LANDMARK_COUNT);
    for i in 0..17 {
        let t = PI * i as f64 / 16.0;
        p.push([-40.0 * t.cos(), 45.0 * t.sin() + 0.2 * c.mouth_open * t.sin()]);
    }
    for side in [-1.0, 1.0] {
        for k in 0..5 {
            // k = 0 is the outer end on the left brow, the inner end on the right.
            let u = if side < 0.0 { k as f64 / 4.0 } else { 1.0 - k as f64 / 4.0 };
            let x = side * (32.0 - 24.0 * u - c.brow_squeeze * u);
            let arch = -3.0 * (PI * u).sin();
            let y = -22.0 + subject.brow_height + arch - c.brow_raise - c.brow_inner_raise * u * u;
            p.push([x, y]);
        }
    }
    for k in 0..4 {
        p.push([0.0, -15.0 + 6.5 * k as f64]);
    }
    for k in 0..5 {
        p.push([-8.0 + 4.0 * k as f64, 10.0 - if k == 2 { 1.5 } else { 0.0 }]);
    }
    for side in [-1.0, 1.0] {
        let cx = side * (20.0 + subject.eye_gap);
        let ry = (3.5 + c.eye_open).max(0.5);
        for k in 0..6 {
            let t = TAU * k as f64 / 6.0;
            p.push([cx - side * 8.0 * t.cos(), -10.0 - ry * t.sin()]);
        }
    }
    let width = 15.0 + subject.mouth_width + c.mouth_widen;
    let lip = |t: f64, upper: f64, lower: f64| {
        let (sin, cos) = t.sin_cos();
        let open = if sin < 0.0 { upper } else { lower };
        [width * cos, 25.0 + open * sin - c.corner_lift * cos * cos]
    };
    let press = 1.0 - c.lip_press;
    for k in 0..12 {
        let t = PI + TAU * k as f64 / 12.0;
        p.push(lip(t, (5.0 + c.upper_lip_raise) * press, (5.0 + c.mouth_open) * press));
    }
    for k in 0..8 {
        let t = PI + TAU * k as f64 / 8.0;
        p.push(lip(t, (1.0 + 0.5 * c.upper_lip_raise) * press, (1.0 + c.mouth_open) * press));
    }
    debug_assert_eq!(p.len(), LANDMARK_COUNT);
    p
}

/// Darkens `v` toward `tone` within `width` of a stroke, with a soft edge.
fn ink(v: &mut f64, d: f64, width: f64, tone: f64) {
    let cover = (1.0 - (d - width) / 1.2).clamp(0.0, 1.0);
    *v += cover * (tone - *v);
}

fn segment_distance(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (px, py) = (a[0] + t * dx - q[0], a[1] + t * dy - q[1]);
    (px * px + py * py).sqrt()
}

fn polyline_distance(q: [f64; 2], points: &[[f64; 2]], closed: bool) -> f64 {
    let n = points.len();
    let segments = if closed { n } else { n - 1 };
    (0..segments)
        .map(|i| segment_distance(q, points[i], points[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn inside_polygon(q: [f64; 2], points: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = points.len();
    for i in 0..n {
        let (a, b) = (points[i], points[(i + n - 1) % n]);
        if (a[1] > q[1]) != (b[1] > q[1]) && q[0] < (b[0] - a[0]) * (q[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
    }
    inside
}

/// Wrinkle texture in face coordinates; zero for Neutral.
fn wrinkles(expression: Expression, s: f64, [x, y]: [f64; 2]) -> f64 {
    let blob = |cx: f64, cy: f64, r: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / (r * r)).exp();
    let stripes = |angle: f64, period: f64| (TAU * (x * angle.cos() + y * angle.sin()) / period).sin();
    let amplitude = 15.0 * s;
    amplitude
        * match expression {
            Expression::Anger => stripes(0.0, 4.0) * blob(0.0, -18.0, 7.0),
            Expression::Surprise => stripes(PI / 2.0, 5.0) * blob(0.0, -36.0, 14.0),
            Expression::Disgust => stripes(PI / 2.0, 3.5) * blob(0.0, -2.0, 7.0),
            Expression::Joy => stripes(PI / 4.0, 4.0) * (blob(-27.0, 10.0, 7.0) + blob(27.0, 10.0, 7.0)),
            Expression::Sadness => stripes(-PI / 3.0, 4.5) * (blob(-9.0, -28.0, 6.0) + blob(9.0, -28.0, 6.0)),
            Expression::Fear => stripes(PI / 2.0, 3.0) * blob(0.0, -30.0, 9.0) + stripes(0.0, 3.0) * blob(0.0, 38.0, 8.0),
            Expression::Neutral => 0.0,
        }
}

struct Frame {
    image: GrayImage,
    landmarks: LandmarkSet,
}

fn render(subject: &Subject, expression: Expression, s: f64, size: usize, rng: &mut ChaCha8Rng) -> Frame {
    let c = controls(expression, s);
    let shape = face_shape(subject, &c);
    let scale = size as f64 / 150.0;
    let placement = SimilarityTransform {
        scale: scale * rng.random_range(0.93..1.07),
        rotation: rng.random_range(-0.12..0.12),
        translation: [
            size as f64 / 2.0 + rng.random_range(-5.0..5.0),
            size as f64 / 2.0 + rng.random_range(-5.0..5.0),
        ],
    };
    let stretch = |[x, y]: [f64; 2]| [x * subject.width, y * subject.height];
    let landmarks: Vec<[f64; 2]> = shape.iter().map(|&p| placement.apply(stretch(p))).collect();
    let back = placement.inverse();

    let brows = [&shape[17..22], &shape[22..27]];
    let eyes = [&shape[36..42], &shape[42..48]];
    let (nose_bridge, nose_base) = (&shape[27..31], &shape[31..36]);
    let (outer_lip, inner_lip) = (&shape[48..60], &shape[60..68]);
    let noise: Vec<f64> = (0..size * size).map(|_| rng.random_range(-20.0..20.0)).collect();

    let image = GrayImage::from_fn(size, size, |px, py| {
        let q = back.apply([px as f64, py as f64]);
        let q = [q[0] / subject.width, q[1] / subject.height];
        let mut v = subject.background + 0.15 * px as f64;
        if (q[0] / 44.0).powi(2) + ((q[1] + 2.0) / 58.0).powi(2) < 1.0 {
            v = subject.skin + 0.1 * q[1] + wrinkles(expression, s, q);
        }
        for b in brows {
            ink(&mut v, polyline_distance(q, b, false), 2.2, 45.0);
        }
        for e in eyes {
            ink(&mut v, polyline_distance(q, e, true), 0.8, 35.0);
            if inside_polygon(q, e) {
                let centre = [(e[0][0] + e[3][0]) / 2.0, (e[0][1] + e[3][1]) / 2.0];
                let r = ((q[0] - centre[0]).powi(2) + (q[1] - centre[1]).powi(2)).sqrt();
                v = if r < 2.8 { 25.0 } else { 225.0 };
            }
        }
        ink(&mut v, polyline_distance(q, nose_bridge, false), 0.7, 110.0);
        ink(&mut v, polyline_distance(q, nose_base, false), 0.9, 90.0);
        if inside_polygon(q, inner_lip) {
            v = 30.0;
        }
        ink(&mut v, polyline_distance(q, outer_lip, true), 1.6, 70.0);
        (v + noise[py * size + px]).round().clamp(0.0, 255.0) as u8
    });
    Frame { image, landmarks: LandmarkSet::new(landmarks).expect("68 landmarks") }
}

fn frame_seed(seed: u64, subject: usize, expression: usize, frame: u32) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ ((subject as u64) << 40)
        ^ ((expression as u64) << 32)
        ^ u64::from(frame)
}

/// Writes images, landmark files, and `manifest.csv` under `dir`.
pub fn generate(dir: &Path, options: &SynthOptions) -> CliResult<DatasetManifest> {
    if options.subjects == 0 || options.frames == 0 || options.size < 64 {
        return Err(CliError::Input("synthetic data needs subjects >= 1, frames >= 1, size >= 64".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut subject_rng = ChaCha8Rng::seed_from_u64(options.seed);
    let subjects: Vec<Subject> = (0..options.subjects).map(|_| Subject::draw(&mut subject_rng)).collect();

    let mut jobs = Vec::new();
    for (si, _) in subjects.iter().enumerate() {
        for (ei, &expression) in Expression::BASIC.iter().enumerate() {
            for frame in 0..options.frames {
                jobs.push((si, ei, expression, frame));
            }
        }
    }
    let entries = jobs
        .par_iter()
        .map(|&(si, ei, expression, frame)| {
            let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(options.seed, si, ei, frame));
            let s = if options.frames > 1 { f64::from(frame) / f64::from(options.frames - 1) } else { 1.0 };
            let rendered = render(&subjects[si], expression, s, options.size, &mut rng);
            let stem = format!("s{si:02}_{}_{frame:02}", expression.name().to_ascii_lowercase());
            let image = PathBuf::from(format!("{stem}.pgm"));
            let landmarks = PathBuf::from(format!("{stem}.txt"));
            rendered.image.save_pgm(&dir.join(&image))?;
            let path = dir.join(&landmarks);
            std::fs::write(&path, rendered.landmarks.to_text()).map_err(|e| CliError::io(&path, e))?;
            Ok(ManifestEntry {
                image,
                landmarks,
                label: expression.name().to_string(),
                subject: format!("s{si:02}"),
                sequence: expression.name().to_ascii_lowercase(),
                frame,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let manifest = DatasetManifest { root: dir.to_path_buf(), entries, classes: expression_classes() };
    manifest.write(&dir.join("manifest.csv"))?;
    Ok(manifest)
}
