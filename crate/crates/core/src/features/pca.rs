use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::descriptor::{Descriptor, FeatureVector};
use crate::error::{Error, Result};

pub const DEFAULT_ENERGY: f64 = 0.95;

const FORMAT: &str = "robohead-pca";
const VERSION: u32 = 1;

/// Principal subspace of a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    dimension: usize,
    #[serde(with = "crate::codec::b64")]
    mean: Vec<f64>,
    /// Component `j` occupies `basis[j * dimension..(j + 1) * dimension]`.
    #[serde(with = "crate::codec::b64")]
    basis: Vec<f64>,
    #[serde(with = "crate::codec::b64")]
    variances: Vec<f64>,
    total_variance: f64,
    energy: f64,
}

#[derive(Serialize, Deserialize)]
struct PcaFile {
    format: String,
    version: u32,
    model: PcaModel,
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Fits the smallest principal subspace holding at least `energy` of the total
/// sample variance.
///
/// Works in whichever of feature space or sample space is smaller. Each component
/// is signed so its largest-magnitude entry is positive.
pub fn pca_fit<S: AsRef<[f64]>>(samples: &[S], energy: f64) -> Result<PcaModel> {
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(Error::InvalidArgument(format!("energy must be in (0, 1], got {energy}")));
    }
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 samples, got {n}")));
    }
    let d = samples[0].as_ref().len();
    if d == 0 {
        return Err(Error::InvalidArgument("PCA needs non-empty samples".into()));
    }
    for (i, s) in samples.iter().enumerate() {
        let s = s.as_ref();
        if s.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: s.len() });
        }
        if let Some(c) = s.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: i, component: c });
        }
    }

    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x = DMatrix::from_fn(n, d, |i, j| samples[i].as_ref()[j] - mean[j]);
    let denom = (n - 1) as f64;

    let small_side = if d <= n { x.transpose() * &x } else { &x * x.transpose() } / denom;
    let eig = SymmetricEigen::new(small_side);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();

    let total: f64 = values.iter().sum();
    let scale = mean.iter().map(|m| m * m).sum::<f64>() + 1.0;
    if total <= 1e-12 * scale {
        return Err(Error::ZeroVariance);
    }

    let mut k = 0;
    let mut kept = 0.0;
    while k < values.len() && kept / total < energy - 1e-12 {
        kept += values[k];
        k += 1;
    }
    let k = k.max(1);

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    for &i in &order[..k] {
        let u = eig.eigenvectors.column(i).into_owned();
        let mut v = if d <= n { u } else { x.transpose() * u };
        for b in &basis {
            let proj = b.dot(&v);
            v.axpy(-proj, b, 1.0);
        }
        let norm = v.norm();
        if norm <= 1e-300 {
            return Err(Error::Singular("degenerate principal component".into()));
        }
        v /= norm;
        let (_, peak) = v.iter().fold((0.0f64, 0.0), |(best, val), &e| {
            if e.abs() > best { (e.abs(), e) } else { (best, val) }
        });
        if peak < 0.0 {
            v.neg_mut();
        }
        basis.push(v);
    }

    Ok(PcaModel {
        dimension: d,
        mean,
        basis: basis.iter().flat_map(|b| b.iter().copied()).collect(),
        variances: values[..k].to_vec(),
        total_variance: total,
        energy,
    })
}

impl PcaModel {
    pub fn input_dimension(&self) -> usize {
        self.dimension
    }

    pub fn components(&self) -> usize {
        self.variances.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.basis[j * self.dimension..(j + 1) * self.dimension]
    }

    /// Variance along each kept component, non-increasing.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn target_energy(&self) -> f64 {
        self.energy
    }

    pub fn retained_fraction(&self) -> f64 {
        self.variances.iter().sum::<f64>() / self.total_variance
    }

    /// Coordinates of `x - mean` in the kept basis.
    pub fn project(&self, x: &[f64]) -> Result<FeatureVector> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, actual: x.len() });
        }
        let values = (0..self.components())
            .map(|j| {
                self.component(j)
                    .iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(b, (v, m))| b * (v - m))
                    .sum()
            })
            .collect();
        Ok(FeatureVector::new(Descriptor::Pca, values))
    }

    pub fn reconstruct(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        if coefficients.len() != self.components() {
            return Err(Error::DimensionMismatch {
                expected: self.components(),
                actual: coefficients.len(),
            });
        }
        let mut out = self.mean.clone();
        for (j, c) in coefficients.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(self.component(j)) {
                *o += c * b;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PcaFile {
            format: FORMAT.into(),
            version: VERSION,
            model: self.clone(),
        })
        .expect("PCA model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PcaFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::Format(format!(
                "expected {FORMAT} v{VERSION}, got {} v{}",
                file.format, file.version
            )));
        }
        let m = file.model;
        let k = m.variances.len();
        if m.mean.len() != m.dimension || m.basis.len() != k * m.dimension {
            return Err(Error::Format("PCA arrays do not match the stated dimension".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
