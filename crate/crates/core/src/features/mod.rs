//! Face image to feature vector: registration, LBP and HOG histograms, PCA.

mod descriptor;
mod hog;
mod image;
mod landmarks;
mod lbp;
mod pca;
mod pipeline;
mod registration;

pub use descriptor::{Descriptor, FeatureVector};
pub use hog::{gradients, hog, DEFAULT_HOG_BINS};
pub use image::GrayImage;
pub use landmarks::{LandmarkSet, LANDMARK_COUNT};
pub use lbp::{lbp_code, lbph, LBP_BINS, UNIFORM_BIN};
pub use pca::{pca_fit, PcaModel, DEFAULT_ENERGY};
pub use pipeline::{describe, describe_all, BlockModel, BlockRange, FeatureConfig, FeaturePipeline};
pub use registration::{fit_similarity, register_and_crop, SimilarityTransform, CROP_SIZE};
