//! Independent reference implementations used to check the library.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use robohead_core::features::GrayImage;
use robohead_core::viseme::{PhonemeSegment, Transcript, VisemeTable};

/// Best dual objective `sum(a) - 1/2 a'Qa` over `0 <= a <= c`, `y'a = 0`, found by
/// trying every split of the samples into at-zero, at-c, and free, solving the
/// equality-constrained stationarity system for the free ones, and keeping the
/// best feasible candidate.
pub fn exhaustive_dual_optimum(k: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q(i, j);
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let f = free.len();
            let m = DMatrix::from_fn(f + 1, f + 1, |r, col| match (r < f, col < f) {
                (true, true) => q(free[r], free[col]),
                (true, false) => y[free[r]],
                (false, true) => y[free[col]],
                (false, false) => 0.0,
            });
            let rhs = DVector::from_fn(f + 1, |r, _| {
                if r < f {
                    let i = free[r];
                    1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q(i, j) * c).sum::<f64>()
                } else {
                    -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c).sum::<f64>()
                }
            });
            let Ok(sol) = m.svd(true, true).solve(&rhs, 1e-12) else {
                continue;
            };
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
        }
        let balance: f64 = a.iter().zip(y).map(|(a, y)| a * y).sum();
        if balance.abs() > 1e-9 || a.iter().any(|&v| v < -1e-9 || v > c + 1e-9) {
            continue;
        }
        best = best.max(objective(&a));
    }
    best
}

/// Best dual objective over a grid of `steps + 1` values per coordinate for the
/// first `n - 1` samples, with the last one fixed by the balance constraint.
pub fn grid_dual_optimum(k: &[Vec<f64>], y: &[f64], c: f64, steps: usize) -> f64 {
    let n = y.len();
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut a: Vec<f64> = idx.iter().map(|&i| c * i as f64 / steps as f64).collect();
        let partial: f64 = a.iter().zip(y).map(|(a, y)| a * y).sum();
        let last = -partial * y[n - 1];
        if (-1e-12..=c + 1e-12).contains(&last) {
            a.push(last.clamp(0.0, c));
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += a[i] * a[j] * y[i] * y[j] * k[i][j];
                }
            }
            best = best.max(a.iter().sum::<f64>() - 0.5 * quad);
        }
        let mut pos = 0;
        loop {
            if pos == n - 1 {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] <= steps {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// LBP code of the centre of a 3x3 patch given row-major, straight from the
/// definition: neighbours clockwise from the top-left set bits 0..7 when they
/// are at least as bright as the centre.
pub fn lbp_oracle(patch: [[u8; 3]; 3]) -> u8 {
    let order = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)];
    let mut code = 0u8;
    for (bit, &(r, c)) in order.iter().enumerate() {
        if patch[r][c] >= patch[1][1] {
            code |= 1 << bit;
        }
    }
    code
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random())
}

/// A transcript of 1..=14 contiguous segments with phonemes drawn from `table`,
/// roughly a quarter of them labial, durations 20 to 300 ms, and occasional pauses.
pub fn random_transcript(rng: &mut ChaCha8Rng, table: &VisemeTable) -> Transcript {
    let labial: Vec<&str> = table
        .classes()
        .iter()
        .filter(|c| c.is_labial)
        .flat_map(|c| c.members.iter().map(String::as_str))
        .collect();
    let other: Vec<&str> = table
        .classes()
        .iter()
        .filter(|c| !c.is_labial)
        .flat_map(|c| c.members.iter().map(String::as_str))
        .collect();
    let n = rng.random_range(1..=14);
    let mut t = rng.random_range(0.0..0.5);
    let mut segs = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random_bool(0.1) {
            t += rng.random_range(0.01..0.2);
        }
        let pool = if rng.random_bool(0.25) { &labial } else { &other };
        let phoneme = pool[rng.random_range(0..pool.len())];
        let d = rng.random_range(0.02..0.3);
        segs.push(PhonemeSegment::new(phoneme, t, t + d));
        t += d;
    }
    Transcript::new(segs).expect("generated transcript is valid")
}

/// `classes` Gaussian blobs in `dim` dimensions, `per_class` samples each.
/// Centres sit at least `6 * spread` out on distinct coordinate axes, so any two
/// are at least 8.5 standard deviations apart.
pub fn gaussian_blobs(rng: &mut ChaCha8Rng, classes: usize, per_class: usize, dim: usize, spread: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, spread).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for k in 0..classes {
        for _ in 0..per_class {
            let mut v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
            v[k % dim] += 6.0 * spread * (1 + k / dim) as f64;
            x.push(v);
            y.push(k);
        }
    }
    (x, y)
}
