use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive semidefinite kernel on feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-gamma * |x - y|^2)`
    Rbf { gamma: f64 },
    /// `(scale * <x, y> + offset)^degree`
    Polynomial { degree: u32, offset: f64, scale: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::InvalidArgument(format!("RBF gamma must be > 0, got {gamma}")))
            }
            KernelSpec::Polynomial { degree, offset, scale }
                if degree == 0 || !(offset >= 0.0 && offset.is_finite()) || !(scale > 0.0 && scale.is_finite()) =>
            {
                Err(Error::InvalidArgument(format!(
                    "polynomial kernel needs degree >= 1, offset >= 0, scale > 0; got {degree}, {offset}, {scale}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Polynomial { degree, offset, scale } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (scale * dot + offset).powi(degree as i32)
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
            KernelSpec::Polynomial { degree, offset, scale } => {
                write!(f, "poly(degree={degree}, offset={offset}, scale={scale})")
            }
        }
    }
}

/// Contiguous slice of feature columns a kernel looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Columns {
    pub start: usize,
    pub len: usize,
}

/// One basis kernel of a multiple-kernel combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisKernel {
    pub spec: KernelSpec,
    /// `None` means every column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Columns>,
}

impl BasisKernel {
    pub fn new(spec: KernelSpec) -> Self {
        BasisKernel { spec, columns: None }
    }

    pub fn on_columns(spec: KernelSpec, start: usize, len: usize) -> Self {
        BasisKernel {
            spec,
            columns: Some(Columns { start, len }),
        }
    }

    pub fn view<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        match self.columns {
            Some(c) => &x[c.start..c.start + c.len],
            None => x,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.spec.eval(self.view(x), self.view(y))
    }

    pub(crate) fn check_dimension(&self, dim: usize) -> Result<()> {
        match self.columns {
            Some(c) if c.len == 0 || c.start + c.len > dim => Err(Error::InvalidArgument(format!(
                "kernel columns {}..{} do not fit {dim} features",
                c.start,
                c.start + c.len
            ))),
            _ => Ok(()),
        }
    }
}

/// A kernel as configured: RBF width may be left for the training data to decide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelChoice {
    Rbf {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        columns: Option<Columns>,
    },
    Polynomial {
        #[serde(default = "default_degree")]
        degree: u32,
        #[serde(default = "default_one")]
        offset: f64,
        #[serde(default = "default_one")]
        scale: f64,
        #[serde(default)]
        columns: Option<Columns>,
    },
}

fn default_degree() -> u32 {
    2
}

fn default_one() -> f64 {
    1.0
}

impl KernelChoice {
    pub fn rbf_auto() -> Self {
        KernelChoice::Rbf { gamma: None, columns: None }
    }

    pub fn polynomial_default() -> Self {
        KernelChoice::Polynomial {
            degree: default_degree(),
            offset: 1.0,
            scale: 1.0,
            columns: None,
        }
    }

    fn columns(&self) -> Option<Columns> {
        match *self {
            KernelChoice::Rbf { columns, .. } | KernelChoice::Polynomial { columns, .. } => columns,
        }
    }

    /// Fixes every free parameter against `features` (the training set).
    pub fn resolve<S: AsRef<[f64]>>(&self, features: &[S]) -> Result<BasisKernel> {
        let columns = self.columns();
        let spec = match *self {
            KernelChoice::Rbf { gamma: Some(gamma), .. } => KernelSpec::Rbf { gamma },
            KernelChoice::Rbf { gamma: None, .. } => {
                let view = BasisKernel { spec: KernelSpec::Rbf { gamma: 1.0 }, columns };
                let rows: Vec<&[f64]> = features.iter().map(|f| view.view(f.as_ref())).collect();
                KernelSpec::Rbf { gamma: auto_gamma(&rows)? }
            }
            KernelChoice::Polynomial { degree, offset, scale, .. } => KernelSpec::Polynomial { degree, offset, scale },
        };
        spec.validate()?;
        let kernel = BasisKernel { spec, columns };
        if let Some(first) = features.first() {
            kernel.check_dimension(first.as_ref().len())?;
        }
        Ok(kernel)
    }
}

/// `1 / (dimension * median pairwise squared distance)`.
pub fn auto_gamma<S: AsRef<[f64]>>(features: &[S]) -> Result<f64> {
    let n = features.len();
    let dim = features.first().map_or(0, |f| f.as_ref().len());
    if n < 2 || dim == 0 {
        return Err(Error::InvalidArgument("automatic RBF width needs two non-empty samples".into()));
    }
    let mut d2 = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (features[i].as_ref(), features[j].as_ref());
            d2.push(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>());
        }
    }
    let mid = d2.len() / 2;
    let (_, median, _) = d2.select_nth_unstable_by(mid, f64::total_cmp);
    let median = *median;
    if !(median > 0.0) {
        return Err(Error::Singular("median pairwise distance is zero; set gamma explicitly".into()));
    }
    Ok(1.0 / (dim as f64 * median))
}

/// Dense symmetric kernel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        GramMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn add_to_diagonal(&mut self, value: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += value;
        }
    }

    /// The principal submatrix on `indices`.
    pub fn select(&self, indices: &[usize]) -> GramMatrix {
        GramMatrix::from_fn(indices.len(), |i, j| self.get(indices[i], indices[j]))
    }

    /// `sum_m weights[m] * grams[m]`.
    pub fn combine(grams: &[GramMatrix], weights: &[f64]) -> Result<GramMatrix> {
        let Some(first) = grams.first() else {
            return Err(Error::InvalidArgument("no kernel matrices to combine".into()));
        };
        if weights.len() != grams.len() {
            return Err(Error::DimensionMismatch { expected: grams.len(), actual: weights.len() });
        }
        if let Some(g) = grams.iter().find(|g| g.n != first.n) {
            return Err(Error::DimensionMismatch { expected: first.n, actual: g.n });
        }
        let mut data = vec![0.0; first.data.len()];
        for (g, &w) in grams.iter().zip(weights) {
            if w != 0.0 {
                for (d, v) in data.iter_mut().zip(&g.data) {
                    *d += w * v;
                }
            }
        }
        Ok(GramMatrix { n: first.n, data })
    }

    /// True when `K + 1e-8 I` has a Cholesky factor, i.e. no eigenvalue below about -1e-8.
    pub fn is_psd(&self) -> bool {
        let mut m = nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data);
        for i in 0..self.n {
            m[(i, i)] += 1e-8;
        }
        m.cholesky().is_some()
    }
}

pub(crate) fn check_features<S: AsRef<[f64]>>(features: &[S]) -> Result<usize> {
    let Some(first) = features.first() else {
        return Err(Error::InvalidArgument("empty feature set".into()));
    };
    let dim = first.as_ref().len();
    for (i, f) in features.iter().enumerate() {
        let f = f.as_ref();
        if f.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: f.len() });
        }
        if let Some(c) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: i, component: c });
        }
    }
    Ok(dim)
}

/// `K[i][j] = k(x_i, x_j)` over `features`.
pub fn compute_gram<S: AsRef<[f64]>>(features: &[S], kernel: &BasisKernel) -> Result<GramMatrix> {
    let dim = check_features(features)?;
    kernel.spec.validate()?;
    kernel.check_dimension(dim)?;
    Ok(GramMatrix::from_fn(features.len(), |i, j| {
        kernel.eval(features[i].as_ref(), features[j].as_ref())
    }))
}
