use serde::{Deserialize, Serialize};

use super::kernel::GramMatrix;
use crate::diag::{Outcome, Warning};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
const PSD_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoOptions {
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions {
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// `sum(alpha) - 1/2 alpha' Q alpha` with `Q_ij = y_i y_j K_ij`.
    pub objective: f64,
    /// Largest remaining KKT violation.
    pub violation: f64,
    pub iterations: usize,
}

impl DualSolution {
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.alphas.len()).filter(|&i| self.alphas[i] > 0.0).collect()
    }
}

pub(crate) fn check_labels(labels: &[f64]) -> Result<()> {
    if let Some(v) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidArgument(format!("labels must be +1 or -1, got {v}")));
    }
    if !labels.contains(&1.0) {
        return Err(Error::SingleClass("-1".into()));
    }
    if !labels.contains(&-1.0) {
        return Err(Error::SingleClass("+1".into()));
    }
    Ok(())
}

/// Maximizes `sum(alpha) - 1/2 alpha' Q alpha` subject to `0 <= alpha <= c` and
/// `sum(alpha_i y_i) = 0`.
///
/// Two-variable coordinate ascent with second-order working-pair selection. A
/// kernel with an eigenvalue below about -1e-8 gets 1e-8 added to its diagonal
/// and a warning.
pub fn solve_svm_dual(gram: &GramMatrix, labels: &[f64], c: f64, options: &SmoOptions) -> Result<Outcome<DualSolution>> {
    let mut warnings = Vec::new();
    let jittered;
    let gram = if gram.is_psd() {
        gram
    } else {
        let mut g = gram.clone();
        g.add_to_diagonal(PSD_JITTER);
        warnings.push(Warning::KernelJitter { jitter: PSD_JITTER });
        jittered = g;
        &jittered
    };
    let solution = solve(gram, labels, c, options, None)?;
    if solution.violation >= options.tolerance {
        warnings.push(Warning::SolverIterationLimit {
            iterations: solution.iterations,
            violation: solution.violation,
        });
    }
    Ok(Outcome::with_warnings(solution, warnings))
}

/// The solver proper, without the PSD check; `warm` seeds alpha and must be feasible.
pub(crate) fn solve(
    gram: &GramMatrix,
    labels: &[f64],
    c: f64,
    options: &SmoOptions,
    warm: Option<&[f64]>,
) -> Result<DualSolution> {
    let n = gram.size();
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: labels.len() });
    }
    check_labels(labels)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be > 0, got {c}")));
    }
    let y = labels;

    let mut alpha = match warm {
        Some(a) if a.len() == n => a.iter().map(|v| v.clamp(0.0, c)).collect(),
        _ => vec![0.0; n],
    };
    // G = Q alpha - 1
    let mut grad = vec![-1.0; n];
    for (j, &aj) in alpha.iter().enumerate() {
        if aj != 0.0 {
            let row = gram.row(j);
            for i in 0..n {
                grad[i] += y[i] * y[j] * row[i] * aj;
            }
        }
    }

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let violation = loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i_sel = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        if i_sel != usize::MAX {
            let row_i = gram.row(i_sel);
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let a = row_i[i_sel] + gram.get(t, t) - 2.0 * row_i[t];
                    let score = -(b * b) / if a > 0.0 { a } else { TAU };
                    if score <= best {
                        best = score;
                        j_sel = t;
                    }
                }
            }
        }
        let violation = if gmin.is_finite() && gmax.is_finite() { (gmax - gmin).max(0.0) } else { 0.0 };
        if violation < options.tolerance || j_sel == usize::MAX || iterations >= options.max_iterations {
            break violation;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kii = gram.get(i, i);
        let kjj = gram.get(j, j);
        let kij = gram.get(i, j);
        let quad = (kii + kjj - 2.0 * kij).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (row_i, row_j) = (gram.row(i), gram.row(j));
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * di + y[j] * row_j[t] * dj);
        }
    };

    // Bias from free vectors, else the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if at_lower {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { 0.5 * (ub + lb) };

    let objective = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    Ok(DualSolution {
        alphas: alpha,
        bias: -rho,
        objective,
        violation,
        iterations,
    })
}

/// `sum(alpha) - 1/2 alpha' Q alpha`, evaluated directly.
pub fn dual_objective(gram: &GramMatrix, labels: &[f64], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        let row = gram.row(i);
        for j in 0..n {
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] * row[j];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}
