use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Descriptor {
    Lbph,
    Hog,
    Pca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub descriptor: Descriptor,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(descriptor: Descriptor, values: Vec<f64>) -> Self {
        FeatureVector { descriptor, values }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// Pixel side of one window when a `side`-pixel image is cut into `grid x grid` windows.
pub(crate) fn window_side(side: usize, grid: usize) -> Result<usize> {
    if grid == 0 || !side.is_multiple_of(grid) || side / grid < 3 {
        return Err(Error::InvalidArgument(format!(
            "a {side}px image cannot be split into {grid}x{grid} windows of at least 3px"
        )));
    }
    Ok(side / grid)
}
