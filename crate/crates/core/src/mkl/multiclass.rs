use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{check_features, compute_gram, BasisKernel, GramMatrix, KernelChoice};
use super::mkl::{train_binary_mkl, BinaryMklSolution, MklOptions, OuterIteration};
use crate::diag::{Outcome, Warning};
use crate::error::{Error, Result};

const FORMAT: &str = "robohead-mkl-model";
const VERSION: u32 = 1;

/// Whether decision values add the bias recovered from the dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    #[default]
    Included,
    /// Training is unchanged; decisions use the kernel expansion alone.
    Omitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub kernels: Vec<KernelChoice>,
    pub mkl: MklOptions,
    pub bias: BiasMode,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            kernels: vec![KernelChoice::rbf_auto(), KernelChoice::polynomial_default()],
            mkl: MklOptions::default(),
            bias: BiasMode::Included,
        }
    }
}

/// `h(x) = sum_m d_m sum_i alpha_i y_i k^m(x_i, x) + bias`, with
/// `kernel_rows[m][i] = k^m(x_i, x)` over the solution's training samples.
pub fn decision_value(solution: &BinaryMklSolution, kernel_rows: &[Vec<f64>]) -> Result<f64> {
    let m = solution.kernel_weights.len();
    if kernel_rows.len() != m {
        return Err(Error::Structure(format!("expected {m} kernel rows, got {}", kernel_rows.len())));
    }
    let n = solution.alphas.len();
    let mut h = solution.bias;
    for (row, &d) in kernel_rows.iter().zip(&solution.kernel_weights) {
        if row.len() != n {
            return Err(Error::Structure(format!("kernel row covers {} of {n} samples", row.len())));
        }
        h += d * solution
            .alphas
            .iter()
            .zip(&solution.labels)
            .zip(row)
            .map(|((a, y), k)| a * y * k)
            .sum::<f64>();
    }
    Ok(h)
}

/// The binary classifier separating class `a` (positive side) from class `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClassifier {
    pub a: usize,
    pub b: usize,
    /// Indices into the model's support vectors.
    pub support: Vec<usize>,
    pub alphas: Vec<f64>,
    /// +1 for class `a`, -1 for class `b`.
    pub labels: Vec<f64>,
    pub kernel_weights: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub history: Vec<OuterIteration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDecision {
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteResult {
    pub winner: usize,
    pub votes: u32,
    pub tally: Vec<u32>,
    pub decisions: Vec<PairDecision>,
}

/// Max-wins vote over pairwise decisions: `value >= 0` is a win for `a`.
///
/// Ties go to the class with the larger sum of `|value|` over the matches it won,
/// then to the lowest class index.
pub fn vote(classes: usize, decisions: Vec<PairDecision>) -> VoteResult {
    let mut tally = vec![0u32; classes];
    let mut strength = vec![0.0f64; classes];
    for d in &decisions {
        let w = if d.value >= 0.0 { d.a } else { d.b };
        tally[w] += 1;
        strength[w] += d.value.abs();
    }
    let mut winner = 0;
    for k in 1..classes {
        if tally[k] > tally[winner] || (tally[k] == tally[winner] && strength[k] > strength[winner]) {
            winner = k;
        }
    }
    VoteResult {
        winner,
        votes: tally[winner],
        tally,
        decisions,
    }
}

/// One-vs-one multiple-kernel classifier over `classes.len()` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    pub classes: Vec<String>,
    pub kernels: Vec<BasisKernel>,
    pub bias_mode: BiasMode,
    pub c: f64,
    pub dimension: usize,
    #[serde(with = "support_codec")]
    pub support_vectors: Vec<Vec<f64>>,
    pub classifiers: Vec<PairClassifier>,
}

mod support_codec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        rows.iter()
            .map(|r| crate::codec::encode_f64s(r))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| crate::codec::decode_f64s(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: MulticlassModel,
}

/// Every unordered class pair `(a, b)` with `a < b`, in lexicographic order.
pub fn class_pairs(classes: usize) -> Vec<(usize, usize)> {
    (0..classes).flat_map(|a| (a + 1..classes).map(move |b| (a, b))).collect()
}

/// Trains one binary MKL classifier per class pair.
///
/// Kernel matrices are computed once over all samples (`n^2` entries per kernel)
/// and each pair trains on its principal submatrices. Pairs train in parallel;
/// results do not depend on scheduling.
pub fn train_multiclass<S: AsRef<[f64]> + Sync>(
    features: &[S],
    labels: &[usize],
    classes: &[String],
    options: &TrainOptions,
) -> Result<Outcome<MulticlassModel>> {
    let dimension = check_features(features)?;
    if labels.len() != features.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), actual: labels.len() });
    }
    let p = classes.len();
    if p < 2 {
        return Err(Error::InvalidArgument("need at least two classes".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= p) {
        return Err(Error::UnknownLabel(bad.to_string()));
    }
    if let Some(k) = (0..p).find(|k| !labels.contains(k)) {
        return Err(Error::SingleClass(format!("class `{}` has no training samples", classes[k])));
    }
    if options.kernels.is_empty() {
        return Err(Error::InvalidArgument("need at least one kernel".into()));
    }

    let kernels = options
        .kernels
        .iter()
        .map(|k| k.resolve(features))
        .collect::<Result<Vec<_>>>()?;
    let grams = kernels
        .par_iter()
        .map(|k| compute_gram(features, k))
        .collect::<Result<Vec<GramMatrix>>>()?;

    let trained = class_pairs(p)
        .into_par_iter()
        .map(|(a, b)| {
            let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == a || labels[i] == b).collect();
            let y: Vec<f64> = idx.iter().map(|&i| if labels[i] == a { 1.0 } else { -1.0 }).collect();
            let sub: Vec<GramMatrix> = grams.iter().map(|g| g.select(&idx)).collect();
            let sol = train_binary_mkl(&sub, &y, &options.mkl)?;
            Ok((a, b, idx, sol))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut used = vec![false; features.len()];
    for (_, _, idx, sol) in &trained {
        for s in sol.value.support_indices() {
            used[idx[s]] = true;
        }
    }
    let mut slot = vec![usize::MAX; features.len()];
    let mut support_vectors = Vec::new();
    for (i, f) in features.iter().enumerate() {
        if used[i] {
            slot[i] = support_vectors.len();
            support_vectors.push(f.as_ref().to_vec());
        }
    }

    let mut warnings: Vec<Warning> = Vec::new();
    let classifiers = trained
        .into_iter()
        .map(|(a, b, idx, sol)| {
            warnings.extend(sol.warnings);
            let s = sol.value;
            let sv = s.support_indices();
            PairClassifier {
                a,
                b,
                support: sv.iter().map(|&i| slot[idx[i]]).collect(),
                alphas: sv.iter().map(|&i| s.alphas[i]).collect(),
                labels: sv.iter().map(|&i| s.labels[i]).collect(),
                kernel_weights: s.kernel_weights,
                bias: s.bias,
                objective: s.objective,
                history: s.history,
            }
        })
        .collect();

    Ok(Outcome::with_warnings(
        MulticlassModel {
            classes: classes.to_vec(),
            kernels,
            bias_mode: options.bias,
            c: options.mkl.c,
            dimension,
            support_vectors,
            classifiers,
        },
        warnings,
    ))
}

impl MulticlassModel {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Decision value of every pair classifier at `x`, in [`class_pairs`] order.
    pub fn decisions(&self, x: &[f64]) -> Result<Vec<PairDecision>> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, actual: x.len() });
        }
        if let Some(c) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: 0, component: c });
        }
        let rows: Vec<Vec<f64>> = self
            .kernels
            .iter()
            .map(|k| self.support_vectors.iter().map(|sv| k.eval(sv, x)).collect())
            .collect();
        Ok(self
            .classifiers
            .iter()
            .map(|pc| {
                let mut h = match self.bias_mode {
                    BiasMode::Included => pc.bias,
                    BiasMode::Omitted => 0.0,
                };
                for (row, &d) in rows.iter().zip(&pc.kernel_weights) {
                    if d != 0.0 {
                        h += d * pc
                            .support
                            .iter()
                            .zip(pc.alphas.iter().zip(&pc.labels))
                            .map(|(&s, (a, y))| a * y * row[s])
                            .sum::<f64>();
                    }
                }
                PairDecision { a: pc.a, b: pc.b, value: h }
            })
            .collect())
    }

    pub fn classify(&self, x: &[f64]) -> Result<VoteResult> {
        Ok(vote(self.class_count(), self.decisions(x)?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::Format(format!(
                "expected {FORMAT} v{VERSION}, got {} v{}",
                file.format, file.version
            )));
        }
        file.model.validate()?;
        Ok(file.model)
    }

    /// Checks that classifiers, kernels, and support vectors agree with each other.
    pub fn validate(&self) -> Result<()> {
        let p = self.classes.len();
        let pairs = class_pairs(p);
        if self.classifiers.len() != pairs.len()
            || self.classifiers.iter().zip(&pairs).any(|(c, &(a, b))| (c.a, c.b) != (a, b))
        {
            return Err(Error::Format("classifiers do not cover every class pair once".into()));
        }
        for c in &self.classifiers {
            if c.kernel_weights.len() != self.kernels.len()
                || c.alphas.len() != c.support.len()
                || c.labels.len() != c.support.len()
                || c.support.iter().any(|&s| s >= self.support_vectors.len())
            {
                return Err(Error::Format(format!("classifier {}-{} is inconsistent", c.a, c.b)));
            }
        }
        if self.support_vectors.iter().any(|s| s.len() != self.dimension) {
            return Err(Error::Format("support vector dimension mismatch".into()));
        }
        Ok(())
    }
}
