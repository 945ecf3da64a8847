use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::kernel::GramMatrix;
use super::smo::{check_labels, solve, DualSolution, SmoOptions};
use crate::diag::{Outcome, Warning};
use crate::error::{Error, Result};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 30;
/// Curvature systems worse conditioned than this fall back to a gradient step.
const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MklOptions {
    pub c: f64,
    pub smo: SmoOptions,
    pub max_outer_iterations: usize,
    /// Stop when the accepted weight step is smaller than this (max norm).
    pub step_tolerance: f64,
    /// Stop when an accepted step lowers the objective by less than this.
    pub decrease_tolerance: f64,
}

impl Default for MklOptions {
    fn default() -> Self {
        MklOptions {
            c: 10.0,
            smo: SmoOptions::default(),
            max_outer_iterations: 100,
            step_tolerance: 1e-4,
            decrease_tolerance: 1e-6,
        }
    }
}

/// One accepted point of the kernel-weight descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterIteration {
    pub weights: Vec<f64>,
    /// Optimal dual objective at `weights`.
    pub objective: f64,
    /// Max-norm of the step that led here (0 for the starting point).
    pub step: f64,
    /// Whether the step came from the curvature model rather than the plain gradient.
    pub second_order: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMklSolution {
    pub labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub kernel_weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub objective: f64,
    /// Remaining KKT violation of the final inner solve.
    pub violation: f64,
    pub history: Vec<OuterIteration>,
}

impl BinaryMklSolution {
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.alphas.len()).filter(|&i| self.alphas[i] > 0.0).collect()
    }
}

/// Euclidean projection onto `{d >= 0, sum d = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let mut x: Vec<f64> = v.iter().map(|&vi| (vi - theta).max(0.0)).collect();
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|xi| *xi /= sum);
    x
}

/// `-1/2 alpha' Q^m alpha` for every kernel: the objective's gradient in the weights.
fn weight_gradient(grams: &[GramMatrix], labels: &[f64], alphas: &[f64]) -> Vec<f64> {
    let t: Vec<f64> = alphas.iter().zip(labels).map(|(a, y)| a * y).collect();
    let support: Vec<usize> = (0..t.len()).filter(|&i| t[i] != 0.0).collect();
    grams
        .iter()
        .map(|g| {
            let mut quad = 0.0;
            for &i in &support {
                let row = g.row(i);
                quad += t[i] * support.iter().map(|&j| row[j] * t[j]).sum::<f64>();
            }
            -0.5 * quad
        })
        .collect()
}

/// Minimizer over the simplex of the local quadratic model of the objective,
/// or `None` when the curvature cannot be trusted.
///
/// Curvature comes from how the free duals move when the weights change: with
/// free set F, `[Q_FF y_F; y_F' 0]` maps dual perturbations to first-order
/// optimality changes, and each kernel pushes on it with `z_m = (Q^m alpha)_F`,
/// giving `H_ml = z_m' [A^-1]_FF z_l`.
fn second_order_target(
    grams: &[GramMatrix],
    combined: &GramMatrix,
    labels: &[f64],
    dual: &DualSolution,
    c: f64,
    weights: &[f64],
    grad: &[f64],
) -> Option<Vec<f64>> {
    let m = grams.len();
    let margin = 1e-8 * c;
    let free: Vec<usize> = (0..dual.alphas.len())
        .filter(|&i| dual.alphas[i] > margin && dual.alphas[i] < c - margin)
        .collect();
    if free.is_empty() {
        return None;
    }
    let f = free.len();
    let y = labels;
    let t: Vec<f64> = dual.alphas.iter().zip(y).map(|(a, y)| a * y).collect();

    let system = DMatrix::from_fn(f + 1, f + 1, |r, col| match (r < f, col < f) {
        (true, true) => y[free[r]] * y[free[col]] * combined.get(free[r], free[col]),
        (true, false) => y[free[r]],
        (false, true) => y[free[col]],
        (false, false) => 0.0,
    });
    let z = DMatrix::from_fn(f + 1, m, |r, k| {
        if r == f {
            return 0.0;
        }
        let i = free[r];
        let row = grams[k].row(i);
        y[i] * row.iter().zip(&t).map(|(kij, tj)| kij * tj).sum::<f64>()
    });

    let svd = system.svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return None;
    }
    let solved = svd.solve(&z, 0.0).ok()?;
    let zf = z.rows(0, f);
    let xf = solved.rows(0, f);
    let h = zf.transpose() * xf;
    let h = (&h + h.transpose()) * 0.5;

    let lipschitz = SymmetricEigen::new(h.clone()).eigenvalues.max();
    let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    if !(lipschitz > 1e-14 * (1.0 + scale)) {
        return None;
    }

    let mut x = weights.to_vec();
    for _ in 0..2000 {
        let step: Vec<f64> = (0..m)
            .map(|a| {
                let curvature: f64 = (0..m).map(|b| h[(a, b)] * (x[b] - weights[b])).sum();
                x[a] - (grad[a] + curvature) / lipschitz
            })
            .collect();
        let next = project_to_simplex(&step);
        let moved = next.iter().zip(&x).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
        x = next;
        if moved < 1e-12 {
            break;
        }
    }
    Some(x)
}

fn gradient_target(weights: &[f64], grad: &[f64]) -> Vec<f64> {
    let mean = grad.iter().sum::<f64>() / grad.len() as f64;
    let spread = grad.iter().fold(0.0f64, |a, g| a.max((g - mean).abs()));
    if spread == 0.0 {
        return weights.to_vec();
    }
    let step: Vec<f64> = weights.iter().zip(grad).map(|(d, g)| d - (g - mean) / spread).collect();
    project_to_simplex(&step)
}

fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Learns the kernel weights `d` on the simplex together with the dual of the SVM
/// on `sum_m d_m K^m`, minimizing the optimal dual objective over `d`.
///
/// Starts from uniform weights. Each outer step builds a local quadratic model of
/// the objective from its gradient and the sensitivity of the free duals,
/// minimizes it over the simplex, and backtracks until the true objective shows
/// sufficient decrease. When that model is unavailable or ill-conditioned the
/// step follows the projected gradient instead. With identical kernels the
/// weights stay uniform.
pub fn train_binary_mkl(grams: &[GramMatrix], labels: &[f64], options: &MklOptions) -> Result<Outcome<BinaryMklSolution>> {
    let Some(first) = grams.first() else {
        return Err(Error::InvalidArgument("need at least one kernel".into()));
    };
    let n = first.size();
    if let Some(g) = grams.iter().find(|g| g.size() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: g.size() });
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: labels.len() });
    }
    check_labels(labels)?;
    let c = options.c;

    let mut warnings = Vec::new();
    let mut owned: Vec<GramMatrix> = Vec::new();
    let grams: &[GramMatrix] = if grams.iter().all(GramMatrix::is_psd) {
        grams
    } else {
        for g in grams {
            let mut g = g.clone();
            if !g.is_psd() {
                g.add_to_diagonal(1e-8);
                warnings.push(Warning::KernelJitter { jitter: 1e-8 });
            }
            owned.push(g);
        }
        &owned
    };

    let m = grams.len();
    let mut weights = vec![1.0 / m as f64; m];
    let mut combined = GramMatrix::combine(grams, &weights)?;
    let mut dual = solve(&combined, labels, c, &options.smo, None)?;
    let mut history = vec![OuterIteration {
        weights: weights.clone(),
        objective: dual.objective,
        step: 0.0,
        second_order: false,
    }];

    for _ in 0..options.max_outer_iterations {
        if m == 1 {
            break;
        }
        let grad = weight_gradient(grams, labels, &dual.alphas);
        let mut candidates = Vec::with_capacity(2);
        if let Some(target) = second_order_target(grams, &combined, labels, &dual, c, &weights, &grad) {
            candidates.push((target, true));
        }
        candidates.push((gradient_target(&weights, &grad), false));

        let mut accepted = None;
        for (target, second_order) in candidates {
            let direction: Vec<f64> = target.iter().zip(&weights).map(|(t, d)| t - d).collect();
            let slope: f64 = direction.iter().zip(&grad).map(|(p, g)| p * g).sum();
            if max_norm(&target, &weights) < options.step_tolerance || slope >= 0.0 {
                continue;
            }
            let mut t = 1.0;
            for _ in 0..MAX_HALVINGS {
                let trial = project_to_simplex(
                    &weights.iter().zip(&direction).map(|(d, p)| d + t * p).collect::<Vec<_>>(),
                );
                let trial_gram = GramMatrix::combine(grams, &trial)?;
                let trial_dual = solve(&trial_gram, labels, c, &options.smo, Some(&dual.alphas))?;
                if trial_dual.objective <= dual.objective + ARMIJO * t * slope {
                    accepted = Some((trial, trial_gram, trial_dual, second_order));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }

        let Some((trial, trial_gram, trial_dual, second_order)) = accepted else {
            break;
        };
        let step = max_norm(&trial, &weights);
        let decrease = dual.objective - trial_dual.objective;
        weights = trial;
        combined = trial_gram;
        dual = trial_dual;
        history.push(OuterIteration {
            weights: weights.clone(),
            objective: dual.objective,
            step,
            second_order,
        });
        if step < options.step_tolerance || decrease < options.decrease_tolerance {
            break;
        }
    }

    if dual.violation >= options.smo.tolerance {
        warnings.push(Warning::SolverIterationLimit {
            iterations: dual.iterations,
            violation: dual.violation,
        });
    }
    Ok(Outcome::with_warnings(
        BinaryMklSolution {
            labels: labels.to_vec(),
            alphas: dual.alphas,
            kernel_weights: weights,
            bias: dual.bias,
            c,
            objective: dual.objective,
            violation: dual.violation,
            history,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mkl::{compute_gram, solve_svm_dual, BasisKernel, KernelSpec};

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_to_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_to_simplex(&[0.3, -0.2, 0.9]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p[0] - 0.2).abs() < 1e-12 && (p[2] - 0.8).abs() < 1e-12);
    }

    fn toy() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..16)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                vec![s * (1.0 + 0.1 * i as f64), ((i * 7) % 5) as f64 - 2.0]
            })
            .collect();
        let y = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        (x, y)
    }

    #[test]
    fn single_kernel_is_plain_svm() {
        let (x, y) = toy();
        let g = compute_gram(&x, &BasisKernel::new(KernelSpec::Rbf { gamma: 0.3 })).unwrap();
        let mkl = train_binary_mkl(std::slice::from_ref(&g), &y, &MklOptions::default()).unwrap().value;
        let svm = solve_svm_dual(&g, &y, 10.0, &SmoOptions::default()).unwrap().value;
        assert_eq!(mkl.kernel_weights, vec![1.0]);
        assert!((mkl.objective - svm.objective).abs() < 1e-6);
    }

    #[test]
    fn identical_kernels_stay_uniform() {
        let (x, y) = toy();
        let g = compute_gram(&x, &BasisKernel::new(KernelSpec::Rbf { gamma: 0.3 })).unwrap();
        let sol = train_binary_mkl(&[g.clone(), g.clone(), g], &y, &MklOptions::default()).unwrap().value;
        for w in &sol.kernel_weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn history_is_feasible_and_monotone() {
        let (x, y) = toy();
        let a = compute_gram(&x, &BasisKernel::on_columns(KernelSpec::Rbf { gamma: 0.5 }, 0, 1)).unwrap();
        let b = compute_gram(&x, &BasisKernel::on_columns(KernelSpec::Rbf { gamma: 0.5 }, 1, 1)).unwrap();
        let sol = train_binary_mkl(&[a, b], &y, &MklOptions::default()).unwrap().value;
        assert!(sol.history.len() > 1);
        for w in sol.history.windows(2) {
            assert!(w[1].objective <= w[0].objective);
        }
        for it in &sol.history {
            assert!((it.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(it.weights.iter().all(|&d| d >= 0.0));
        }
        assert!(sol.kernel_weights[0] > 0.8, "{:?}", sol.kernel_weights);
    }
}
