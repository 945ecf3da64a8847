use super::descriptor::{window_side, Descriptor, FeatureVector};
use super::image::GrayImage;
use super::registration::CROP_SIZE;
use crate::error::Result;

/// 58 uniform patterns plus one bin shared by every other code.
pub const LBP_BINS: usize = 59;

/// Neighbour offsets, clockwise from the top-left; neighbour `i` sets bit `i`.
const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

const fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_left(1)).count_ones()
}

const fn build_uniform_table() -> [u8; 256] {
    let mut table = [(LBP_BINS - 1) as u8; 256];
    let mut next = 0u8;
    let mut code = 0usize;
    while code < 256 {
        if transitions(code as u8) <= 2 {
            table[code] = next;
            next += 1;
        }
        code += 1;
    }
    table
}

/// Histogram bin of each 8-bit code: uniform codes in ascending order take bins
/// 0..58, the rest share bin 58.
pub const UNIFORM_BIN: [u8; 256] = build_uniform_table();

/// Code of the pixel at `(x, y)`, which must have all eight neighbours.
pub fn lbp_code(image: &GrayImage, x: usize, y: usize) -> u8 {
    let center = image.get(x, y);
    NEIGHBOURS.iter().enumerate().fold(0u8, |code, (bit, &(dx, dy))| {
        let n = image.get(x.wrapping_add_signed(dx), y.wrapping_add_signed(dy));
        code | (u8::from(n >= center) << bit)
    })
}

/// Uniform-LBP histograms over a `grid x grid` tiling of a registered crop.
///
/// Each window counts only its own interior pixels, so every window of side `w`
/// contributes `(w - 2)^2` codes. Result length is `grid * grid * 59`.
pub fn lbph(image: &GrayImage, grid: usize) -> Result<FeatureVector> {
    image.expect_size(CROP_SIZE, CROP_SIZE)?;
    let side = window_side(CROP_SIZE, grid)?;
    let mut values = vec![0.0; grid * grid * LBP_BINS];
    for wy in 0..grid {
        for wx in 0..grid {
            let hist = &mut values[(wy * grid + wx) * LBP_BINS..][..LBP_BINS];
            for y in wy * side + 1..(wy + 1) * side - 1 {
                for x in wx * side + 1..(wx + 1) * side - 1 {
                    hist[UNIFORM_BIN[lbp_code(image, x, y) as usize] as usize] += 1.0;
                }
            }
        }
    }
    Ok(FeatureVector::new(Descriptor::Lbph, values))
}
