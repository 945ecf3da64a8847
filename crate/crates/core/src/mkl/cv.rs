use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::multiclass::{train_multiclass, TrainOptions};
use crate::diag::{Outcome, Warning};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvScheme {
    /// Seeded shuffle, dealt round-robin per class so folds stay balanced.
    #[default]
    Random,
    /// Whole subjects go to one fold, so no test subject is ever trained on.
    PersonIndependent,
}

impl std::fmt::Display for CvScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CvScheme::Random => "random",
            CvScheme::PersonIndependent => "person-independent",
        })
    }
}

impl std::str::FromStr for CvScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(CvScheme::Random),
            "person-independent" => Ok(CvScheme::PersonIndependent),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme `{other}` (expected random or person-independent)"
            ))),
        }
    }
}

fn fnv1a(seed: u64, text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(text.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Fold index of every sample.
pub fn assign_folds(
    labels: &[usize],
    subjects: Option<&[String]>,
    scheme: CvScheme,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = labels.len();
    if folds < 2 || folds > n {
        return Err(Error::InvalidArgument(format!("cannot split {n} samples into {folds} folds")));
    }
    match scheme {
        CvScheme::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            order.sort_by_key(|&i| labels[i]);
            let mut out = vec![0; n];
            for (k, &i) in order.iter().enumerate() {
                out[i] = k % folds;
            }
            Ok(out)
        }
        CvScheme::PersonIndependent => {
            let Some(subjects) = subjects else {
                return Err(Error::InvalidArgument("person-independent folds need subject ids".into()));
            };
            if subjects.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: subjects.len() });
            }
            let unique: BTreeSet<&str> = subjects.iter().map(String::as_str).collect();
            if unique.len() < folds {
                return Err(Error::InvalidArgument(format!(
                    "{} subjects cannot fill {folds} person-independent folds",
                    unique.len()
                )));
            }
            let mut ordered: Vec<&str> = unique.into_iter().collect();
            ordered.sort_by_key(|s| (fnv1a(seed, s), *s));
            Ok(subjects
                .iter()
                .map(|s| ordered.iter().position(|o| o == s).expect("subject listed") % folds)
                .collect())
        }
    }
}

/// Counts of true class (rows) against predicted class (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let p = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; p]; p],
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|k| self.counts[k][k]).sum()
    }

    /// Fraction of samples on the diagonal.
    pub fn overall_rate(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    /// Each row as percentages of that class's samples (all zero for empty rows).
    pub fn row_percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if sum == 0 { 0.0 } else { 100.0 * c as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }

    /// Same counts with rows and columns in `order`; classes not listed follow in
    /// their current order.
    pub fn reordered(&self, order: &[&str]) -> ConfusionMatrix {
        let mut perm: Vec<usize> = order
            .iter()
            .filter_map(|name| self.classes.iter().position(|c| c == name))
            .collect();
        let rest: Vec<usize> = (0..self.classes.len()).filter(|k| !perm.contains(k)).collect();
        perm.extend(rest);
        ConfusionMatrix {
            classes: perm.iter().map(|&k| self.classes[k].clone()).collect(),
            counts: perm
                .iter()
                .map(|&r| perm.iter().map(|&c| self.counts[r][c]).collect())
                .collect(),
        }
    }

    /// Fixed-width table of row percentages with an overall-rate footer.
    pub fn to_text(&self) -> String {
        let width = self.classes.iter().map(String::len).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = write!(out, "{:width$}", "");
        for c in &self.classes {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(self.row_percentages()) {
            let _ = write!(out, "{c:width$}");
            for v in row {
                let _ = write!(out, " {v:>width$.1}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "overall: {:.1}% ({} of {})",
            100.0 * self.overall_rate(),
            self.correct(),
            self.total()
        );
        out
    }

    /// `true\predicted` header, one row of percentages per class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in &self.classes {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(self.row_percentages()) {
            out.push_str(c);
            for v in row {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }
}

/// A fold left out because its training part lacked a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedFold {
    pub fold: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub scheme: CvScheme,
    pub folds: usize,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub rejected: Vec<RejectedFold>,
    /// Fold index of every sample.
    pub assignment: Vec<usize>,
}

impl CvReport {
    pub fn overall_rate(&self) -> f64 {
        self.confusion.overall_rate()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CvSetup<'a> {
    pub scheme: CvScheme,
    pub folds: usize,
    pub seed: u64,
    pub subjects: Option<&'a [String]>,
}

/// k-fold cross-validation of the one-vs-one MKL classifier.
///
/// Each fold trains on the other folds only. A fold whose training part misses
/// a class is skipped and listed in the report instead of failing the run.
pub fn cross_validate<S: AsRef<[f64]> + Sync>(
    features: &[S],
    labels: &[usize],
    classes: &[String],
    setup: CvSetup<'_>,
    options: &TrainOptions,
) -> Result<Outcome<CvReport>> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), actual: labels.len() });
    }
    let assignment = assign_folds(labels, setup.subjects, setup.scheme, setup.folds, setup.seed)?;
    let mut confusion = ConfusionMatrix::new(classes.to_vec());
    let mut rejected = Vec::new();
    let mut warnings: Vec<Warning> = Vec::new();

    for fold in 0..setup.folds {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] == fold).collect();
        if test.is_empty() {
            continue;
        }
        if let Some(k) = (0..classes.len()).find(|&k| !train.iter().any(|&i| labels[i] == k)) {
            let reason = format!("training part has no `{}` samples", classes[k]);
            log::warn!("fold {fold} rejected: {reason}");
            rejected.push(RejectedFold { fold, reason });
            continue;
        }
        let x: Vec<&[f64]> = train.iter().map(|&i| features[i].as_ref()).collect();
        let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let model = train_multiclass(&x, &y, classes, options)?;
        warnings.extend(model.warnings);
        for &i in &test {
            let r = model.value.classify(features[i].as_ref())?;
            confusion.record(labels[i], r.winner);
        }
        log::info!("fold {fold}: trained on {}, tested on {}", train.len(), test.len());
    }
    if confusion.total() == 0 {
        return Err(Error::InvalidArgument("every fold was rejected; nothing was evaluated".into()));
    }
    Ok(Outcome::with_warnings(
        CvReport {
            scheme: setup.scheme,
            folds: setup.folds,
            seed: setup.seed,
            confusion,
            rejected,
            assignment,
        },
        warnings,
    ))
}
