use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::descriptor::{Descriptor, FeatureVector};
use super::hog::{hog, DEFAULT_HOG_BINS};
use super::image::GrayImage;
use super::landmarks::LandmarkSet;
use super::lbp::lbph;
use super::pca::{pca_fit, PcaModel, DEFAULT_ENERGY};
use super::registration::register_and_crop;
use crate::diag::Outcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Windows per side of the 128px crop: 8 gives 16px windows, 16 gives 8px windows.
    pub grid: usize,
    pub hog_bins: usize,
    pub lbph: bool,
    pub hog: bool,
    pub pca_energy: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            grid: 8,
            hog_bins: DEFAULT_HOG_BINS,
            lbph: true,
            hog: true,
            pca_energy: DEFAULT_ENERGY,
        }
    }
}

impl FeatureConfig {
    pub fn descriptors(&self) -> Vec<Descriptor> {
        let mut out = Vec::new();
        if self.lbph {
            out.push(Descriptor::Lbph);
        }
        if self.hog {
            out.push(Descriptor::Hog);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.descriptors().is_empty() {
            return Err(Error::InvalidArgument("enable at least one of lbph, hog".into()));
        }
        if !(self.pca_energy > 0.0 && self.pca_energy <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "pca_energy must be in (0, 1], got {}",
                self.pca_energy
            )));
        }
        if self.hog_bins == 0 {
            return Err(Error::InvalidArgument("hog_bins must be positive".into()));
        }
        Ok(())
    }
}

/// Raw descriptor histograms of a registered crop, in [`FeatureConfig::descriptors`] order.
pub fn describe(crop: &GrayImage, config: &FeatureConfig) -> Result<Vec<FeatureVector>> {
    config
        .descriptors()
        .into_iter()
        .map(|d| match d {
            Descriptor::Lbph => lbph(crop, config.grid),
            Descriptor::Hog => hog(crop, config.grid, config.hog_bins),
            Descriptor::Pca => unreachable!("not a raw descriptor"),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockModel {
    pub descriptor: Descriptor,
    pub pca: PcaModel,
    /// Multiplier that gives the reduced training block unit mean squared norm.
    pub scale: f64,
}

/// Where one descriptor's reduced coordinates sit in the final feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRange {
    pub descriptor: Descriptor,
    pub start: usize,
    pub len: usize,
}

/// Everything needed to turn an image plus landmarks into a classifier input:
/// registration target, descriptor settings, and one PCA per descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub config: FeatureConfig,
    pub reference: LandmarkSet,
    pub blocks: Vec<BlockModel>,
}

impl FeaturePipeline {
    /// Fits one PCA per descriptor block on `raw` (one entry per sample, blocks
    /// in descriptor order), then scales each reduced block to unit mean squared
    /// norm so no descriptor dominates by magnitude alone.
    pub fn fit(config: FeatureConfig, reference: LandmarkSet, raw: &[Vec<FeatureVector>]) -> Result<Self> {
        config.validate()?;
        let descriptors = config.descriptors();
        if let Some(bad) = raw.iter().find(|s| s.len() != descriptors.len()) {
            return Err(Error::DimensionMismatch { expected: descriptors.len(), actual: bad.len() });
        }
        let blocks = descriptors
            .iter()
            .enumerate()
            .map(|(b, &descriptor)| {
                let column: Vec<&FeatureVector> = raw.iter().map(|s| &s[b]).collect();
                let pca = pca_fit(&column.iter().map(|f| f.values.as_slice()).collect::<Vec<_>>(), config.pca_energy)?;
                let mut mean_sq = 0.0;
                for f in &column {
                    let p = pca.project(&f.values)?;
                    mean_sq += p.values.iter().map(|v| v * v).sum::<f64>();
                }
                mean_sq /= column.len() as f64;
                Ok(BlockModel {
                    descriptor,
                    pca,
                    scale: 1.0 / mean_sq.sqrt(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeaturePipeline { config, reference, blocks })
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.pca.components()).sum()
    }

    pub fn block_ranges(&self) -> Vec<BlockRange> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = BlockRange { descriptor: b.descriptor, start, len: b.pca.components() };
                start += r.len;
                r
            })
            .collect()
    }

    /// Reduces raw descriptor blocks to the final feature vector.
    pub fn reduce(&self, raw: &[FeatureVector]) -> Result<Vec<f64>> {
        if raw.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), actual: raw.len() });
        }
        let mut out = Vec::with_capacity(self.dimension());
        for (block, f) in self.blocks.iter().zip(raw) {
            out.extend(block.pca.project(&f.values)?.values.iter().map(|v| v * block.scale));
        }
        Ok(out)
    }

    /// Registers, describes, and reduces one face.
    pub fn process(&self, image: &GrayImage, landmarks: &LandmarkSet) -> Result<Outcome<Vec<f64>>> {
        let crop = register_and_crop(image, landmarks, &self.reference)?;
        let raw = describe(&crop.value, &self.config)?;
        Ok(Outcome::with_warnings(self.reduce(&raw)?, crop.warnings))
    }
}

/// Registers and describes many faces in parallel; output order follows input order.
pub fn describe_all(
    faces: &[(GrayImage, LandmarkSet)],
    reference: &LandmarkSet,
    config: &FeatureConfig,
) -> Result<Vec<Outcome<Vec<FeatureVector>>>> {
    faces
        .par_iter()
        .map(|(image, landmarks)| {
            let crop = register_and_crop(image, landmarks, reference)?;
            Ok(Outcome::with_warnings(describe(&crop.value, config)?, crop.warnings))
        })
        .collect()
}
