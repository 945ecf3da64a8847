use std::f64::consts::PI;

use super::descriptor::{window_side, Descriptor, FeatureVector};
use super::image::GrayImage;
use super::registration::CROP_SIZE;
use crate::error::{Error, Result};

pub const DEFAULT_HOG_BINS: usize = 59;

const NORM_EPSILON: f64 = 1e-6;

/// Central difference inside the image, one-sided at the border.
fn derivative(prev: Option<f64>, here: f64, next: Option<f64>) -> f64 {
    match (prev, next) {
        (Some(p), Some(n)) => 0.5 * (n - p),
        (None, Some(n)) => n - here,
        (Some(p), None) => here - p,
        (None, None) => 0.0,
    }
}

/// `(dI/dx, dI/dy)` at every pixel, row-major.
pub fn gradients(image: &GrayImage) -> Vec<(f64, f64)> {
    let (w, h) = (image.width(), image.height());
    let px = |x: usize, y: usize| f64::from(image.get(x, y));
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let gx = derivative(
                x.checked_sub(1).map(|xx| px(xx, y)),
                px(x, y),
                (x + 1 < w).then(|| px(x + 1, y)),
            );
            let gy = derivative(
                y.checked_sub(1).map(|yy| px(x, yy)),
                px(x, y),
                (y + 1 < h).then(|| px(x, y + 1)),
            );
            out.push((gx, gy));
        }
    }
    out
}

/// Histograms of unsigned gradient orientation over a `grid x grid` tiling.
///
/// Bin `k` is centred on orientation `k * pi / bins`; each pixel splits its
/// gradient magnitude linearly between the two nearest centres (wrapping at pi).
/// Each window histogram `v` becomes `v / sqrt(|v|^2 + 1e-12)`.
pub fn hog(image: &GrayImage, grid: usize, bins: usize) -> Result<FeatureVector> {
    image.expect_size(CROP_SIZE, CROP_SIZE)?;
    if bins == 0 {
        return Err(Error::InvalidArgument("HOG needs at least one bin".into()));
    }
    let side = window_side(CROP_SIZE, grid)?;
    let grads = gradients(image);
    let bin_width = PI / bins as f64;
    let mut values = vec![0.0; grid * grid * bins];

    for wy in 0..grid {
        for wx in 0..grid {
            let hist = &mut values[(wy * grid + wx) * bins..][..bins];
            for y in wy * side..(wy + 1) * side {
                for x in wx * side..(wx + 1) * side {
                    let (gx, gy) = grads[y * CROP_SIZE + x];
                    let magnitude = gx.hypot(gy);
                    if magnitude == 0.0 {
                        continue;
                    }
                    let position = gy.atan2(gx).rem_euclid(PI) / bin_width;
                    let lower = position.floor();
                    let frac = position - lower;
                    let b0 = lower as usize % bins;
                    hist[b0] += magnitude * (1.0 - frac);
                    hist[(b0 + 1) % bins] += magnitude * frac;
                }
            }
            let norm = (hist.iter().map(|v| v * v).sum::<f64>() + NORM_EPSILON * NORM_EPSILON).sqrt();
            for v in hist.iter_mut() {
                *v /= norm;
            }
        }
    }
    Ok(FeatureVector::new(Descriptor::Hog, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_zero() {
        let v = hog(&GrayImage::filled(128, 128, 140), 8, DEFAULT_HOG_BINS).unwrap();
        assert_eq!(v.dimension(), 3776);
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn vertical_step_lands_in_bin_zero() {
        let img = GrayImage::from_fn(128, 128, |x, _| if x < 60 { 0 } else { 255 });
        let v = hog(&img, 8, DEFAULT_HOG_BINS).unwrap();
        let mut mass = 0.0;
        for window in v.values.chunks(DEFAULT_HOG_BINS) {
            mass += window[0];
            assert!(window[1..].iter().all(|&x| x == 0.0));
        }
        assert!(mass > 0.0);
    }

    #[test]
    fn interpolates_between_bins() {
        // 45 degree ramp: with 4 bins centres sit at 0, 45, 90, 135 degrees.
        let img = GrayImage::from_fn(128, 128, |x, y| ((x + y) / 2) as u8);
        let v = hog(&img, 8, 4).unwrap();
        let w = &v.values[4 * 9..4 * 10];
        assert!(w[1] > 0.99 && w[0] < 1e-9 && w[2] < 1e-9);
    }

    #[test]
    fn window_norms_are_zero_or_one() {
        let img = GrayImage::from_fn(128, 128, |x, y| if x > 64 && y > 70 { (x * y % 251) as u8 } else { 3 });
        let v = hog(&img, 8, 9).unwrap();
        for window in v.values.chunks(9) {
            let n = window.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(n == 0.0 || (n - 1.0).abs() < 1e-6, "{n}");
            assert!(window.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn border_gradients_are_one_sided() {
        let img = GrayImage::from_fn(4, 1, |x, _| [0, 10, 30, 60][x]);
        let g: Vec<f64> = gradients(&img).iter().map(|g| g.0).collect();
        assert_eq!(g, vec![10.0, 15.0, 25.0, 30.0]);
    }
}
