use serde::{Deserialize, Serialize};

use super::image::GrayImage;
use super::landmarks::LandmarkSet;
use crate::diag::{Outcome, Warning};
use crate::error::{Error, Result};

/// Side of the registered face crop in pixels.
pub const CROP_SIZE: usize = 128;

/// `p -> scale * R(rotation) * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: f64,
    pub translation: [f64; 2],
}

impl SimilarityTransform {
    pub const IDENTITY: SimilarityTransform = SimilarityTransform {
        scale: 1.0,
        rotation: 0.0,
        translation: [0.0, 0.0],
    };

    pub fn apply(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        let (sin, cos) = self.rotation.sin_cos();
        [
            self.scale * (cos * x - sin * y) + self.translation[0],
            self.scale * (sin * x + cos * y) + self.translation[1],
        ]
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let scale = 1.0 / self.scale;
        let rotation = -self.rotation;
        let (sin, cos) = rotation.sin_cos();
        let [tx, ty] = self.translation;
        SimilarityTransform {
            scale,
            rotation,
            translation: [-scale * (cos * tx - sin * ty), -scale * (sin * tx + cos * ty)],
        }
    }
}

/// Least-squares similarity transform taking `source` onto `reference`.
///
/// Closed form: with both sets centered, `scale * e^{i rotation}` is
/// `sum(conj(a_i) b_i) / sum(|a_i|^2)` treating points as complex numbers.
pub fn fit_similarity(source: &LandmarkSet, reference: &LandmarkSet) -> Result<SimilarityTransform> {
    let (src, dst) = (source.points(), reference.points());
    let n = src.len() as f64;
    let centroid = |pts: &[[f64; 2]]| {
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        [sx / n, sy / n]
    };
    let (mp, mq) = (centroid(src), centroid(dst));

    let (mut re, mut im, mut spread) = (0.0, 0.0, 0.0);
    for (p, q) in src.iter().zip(dst) {
        let (ax, ay) = (p[0] - mp[0], p[1] - mp[1]);
        let (bx, by) = (q[0] - mq[0], q[1] - mq[1]);
        re += ax * bx + ay * by;
        im += ax * by - ay * bx;
        spread += ax * ax + ay * ay;
    }
    if spread <= 1e-12 {
        return Err(Error::Singular("source landmarks all coincide".into()));
    }
    let scale = re.hypot(im) / spread;
    if scale <= 0.0 {
        return Err(Error::Singular("reference landmarks all coincide".into()));
    }
    let rotation = im.atan2(re);
    let partial = SimilarityTransform {
        scale,
        rotation,
        translation: [0.0, 0.0],
    };
    let moved = partial.apply(mp);
    Ok(SimilarityTransform {
        translation: [mq[0] - moved[0], mq[1] - moved[1]],
        ..partial
    })
}

/// Bilinear sample at `(x, y)`, or `None` when the point is off the image.
fn bilinear(image: &GrayImage, x: f64, y: f64) -> Option<f64> {
    const SLACK: f64 = 1e-9;
    let (w, h) = (image.width() as f64, image.height() as f64);
    if !(x >= -SLACK && y >= -SLACK && x <= w - 1.0 + SLACK && y <= h - 1.0 + SLACK) {
        return None;
    }
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let x1 = (x0 + 1).min(image.width() - 1);
    let y1 = (y0 + 1).min(image.height() - 1);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let px = |xx, yy| f64::from(image.get(xx, yy));
    let top = px(x0, y0) * (1.0 - fx) + px(x1, y0) * fx;
    let bottom = px(x0, y1) * (1.0 - fx) + px(x1, y1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Warps `image` into the reference frame and crops the reference landmarks'
/// bounding box, resampled to `CROP_SIZE x CROP_SIZE`.
///
/// Output pixels whose source falls outside the image are 0 and reported as a warning.
pub fn register_and_crop(
    image: &GrayImage,
    landmarks: &LandmarkSet,
    reference: &LandmarkSet,
) -> Result<Outcome<GrayImage>> {
    if image.width() == 0 || image.height() == 0 {
        return Err(Error::Structure("empty image".into()));
    }
    let back = fit_similarity(landmarks, reference)?.inverse();
    let (x0, y0, x1, y1) = reference.bounding_box();
    let edge = (CROP_SIZE - 1) as f64;
    let (sx, sy) = ((x1 - x0) / edge, (y1 - y0) / edge);

    let mut outside = 0;
    let out = GrayImage::from_fn(CROP_SIZE, CROP_SIZE, |u, v| {
        let [x, y] = back.apply([x0 + u as f64 * sx, y0 + v as f64 * sy]);
        match bilinear(image, x, y) {
            Some(value) => value.round().clamp(0.0, 255.0) as u8,
            None => {
                outside += 1;
                0
            }
        }
    });
    let warnings = if outside > 0 {
        vec![Warning::OutOfBounds { pixels: outside }]
    } else {
        Vec::new()
    };
    Ok(Outcome::with_warnings(out, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::LANDMARK_COUNT;

    fn shape() -> LandmarkSet {
        LandmarkSet::new(
            (0..LANDMARK_COUNT)
                .map(|i| {
                    let t = i as f64 * 0.37;
                    [64.0 + 40.0 * t.cos() + (i % 5) as f64, 60.0 + 50.0 * (1.3 * t).sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    fn moved(set: &LandmarkSet, t: &SimilarityTransform) -> LandmarkSet {
        LandmarkSet::new(set.points().iter().map(|&p| t.apply(p)).collect()).unwrap()
    }

    #[test]
    fn identity_fit() {
        let t = fit_similarity(&shape(), &shape()).unwrap();
        assert!((t.scale - 1.0).abs() < 1e-9);
        assert!(t.rotation.abs() < 1e-9);
        assert!(t.translation[0].abs() < 1e-9 && t.translation[1].abs() < 1e-9);
    }

    #[test]
    fn recovers_rotation() {
        let rot = SimilarityTransform {
            rotation: 30f64.to_radians(),
            ..SimilarityTransform::IDENTITY
        };
        let t = fit_similarity(&moved(&shape(), &rot), &shape()).unwrap();
        assert!((t.rotation + 30f64.to_radians()).abs() < 1e-6);
        assert!((t.scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_scale_and_shift() {
        let fwd = SimilarityTransform {
            scale: 2.0,
            rotation: 0.0,
            translation: [10.0, 5.0],
        };
        let src = moved(&shape(), &fwd);
        let t = fit_similarity(&src, &shape()).unwrap();
        assert!((t.scale - 0.5).abs() < 1e-6);
        for (p, q) in src.points().iter().zip(shape().points()) {
            let r = t.apply(*p);
            assert!((r[0] - q[0]).abs() < 1e-6 && (r[1] - q[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let t = SimilarityTransform {
            scale: 1.7,
            rotation: -0.4,
            translation: [3.0, -8.0],
        };
        let p = t.inverse().apply(t.apply([12.5, -3.25]));
        assert!((p[0] - 12.5).abs() < 1e-12 && (p[1] + 3.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_source_is_singular() {
        let dot = LandmarkSet::new(vec![[4.0, 4.0]; LANDMARK_COUNT]).unwrap();
        assert!(matches!(fit_similarity(&dot, &shape()), Err(Error::Singular(_))));
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = GrayImage::filled(200, 150, 77);
        let out = register_and_crop(&img, &shape(), &LandmarkSet::mean_reference(&[shape()], 128).unwrap()).unwrap();
        assert_eq!(out.value.width(), 128);
        assert_eq!(out.value.height(), 128);
        assert!(out.value.data().iter().all(|&v| v == 77));
    }

    #[test]
    fn off_image_pixels_warn() {
        let img = GrayImage::filled(40, 40, 200);
        let out = register_and_crop(&img, &shape(), &shape()).unwrap();
        assert!(matches!(out.warnings[..], [Warning::OutOfBounds { pixels }] if pixels > 0));
        assert!(out.value.data().contains(&0));
    }
}
