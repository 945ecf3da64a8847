//! One-vs-one expression classifier with learned convex combinations of kernels.

mod cv;
mod kernel;
#[allow(clippy::module_inception)]
mod mkl;
mod multiclass;
mod smo;

pub use cv::{assign_folds, cross_validate, ConfusionMatrix, CvReport, CvScheme, CvSetup, RejectedFold};
pub use kernel::{auto_gamma, compute_gram, BasisKernel, Columns, GramMatrix, KernelChoice, KernelSpec};
pub use mkl::{project_to_simplex, train_binary_mkl, BinaryMklSolution, MklOptions, OuterIteration};
pub use multiclass::{
    class_pairs, decision_value, train_multiclass, vote, BiasMode, MulticlassModel, PairClassifier, PairDecision,
    TrainOptions, VoteResult,
};
pub use smo::{dual_objective, solve_svm_dual, DualSolution, SmoOptions};
