use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LANDMARK_COUNT: usize = 68;

/// The 68 facial landmark points of one image, in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct LandmarkSet {
    points: Vec<[f64; 2]>,
}

impl LandmarkSet {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::Structure(format!(
                "expected {LANDMARK_COUNT} landmarks, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Structure(format!("landmark {i} is not finite")));
        }
        Ok(LandmarkSet { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// One `x y` pair per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut points = Vec::with_capacity(LANDMARK_COUNT);
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [x, y] = fields[..] else {
                return Err(Error::parse(origin, no + 1, "expected `x y`"));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(origin, no + 1, format!("`{s}` is not a number")))
            };
            points.push([num(x)?, num(y)?]);
        }
        Self::new(points).map_err(|e| Error::parse(origin, 0, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        self.points.iter().map(|[x, y]| format!("{x} {y}\n")).collect()
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &[x, y]| (a.min(x), b.min(y), c.max(x), d.max(y)),
        )
    }

    /// Mean shape of `sets`, stretched per axis so its bounding box is
    /// `[0, side - 1]` in both directions.
    pub fn mean_reference(sets: &[LandmarkSet], side: usize) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidArgument("no landmark sets to average".into()));
        }
        let n = sets.len() as f64;
        let mut mean = vec![[0.0; 2]; LANDMARK_COUNT];
        for set in sets {
            for (m, p) in mean.iter_mut().zip(&set.points) {
                m[0] += p[0] / n;
                m[1] += p[1] / n;
            }
        }
        let mean = LandmarkSet { points: mean };
        let (x0, y0, x1, y1) = mean.bounding_box();
        if !(x1 - x0 > 0.0 && y1 - y0 > 0.0) {
            return Err(Error::Singular("mean landmark shape has zero extent".into()));
        }
        let edge = (side - 1) as f64;
        let points = mean
            .points
            .iter()
            .map(|&[x, y]| [(x - x0) / (x1 - x0) * edge, (y - y0) / (y1 - y0) * edge])
            .collect();
        Ok(LandmarkSet { points })
    }
}

impl TryFrom<Vec<[f64; 2]>> for LandmarkSet {
    type Error = Error;

    fn try_from(points: Vec<[f64; 2]>) -> Result<Self> {
        LandmarkSet::new(points)
    }
}

impl From<LandmarkSet> for Vec<[f64; 2]> {
    fn from(set: LandmarkSet) -> Self {
        set.points
    }
}
