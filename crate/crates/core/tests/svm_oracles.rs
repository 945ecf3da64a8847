mod support;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robohead_core::mkl::{
    compute_gram, dual_objective, project_to_simplex, solve_svm_dual, train_binary_mkl, BasisKernel,
    GramMatrix, KernelSpec, MklOptions, SmoOptions,
};

fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let mut y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    y[0] = 1.0;
    y[1] = -1.0;
    (x, y)
}

fn random_kernel(rng: &mut ChaCha8Rng) -> BasisKernel {
    let spec = match rng.random_range(0..3) {
        0 => KernelSpec::Rbf { gamma: rng.random_range(0.1..3.0) },
        1 => KernelSpec::Polynomial { degree: rng.random_range(1..=3), offset: 1.0, scale: 0.5 },
        _ => KernelSpec::Polynomial { degree: 1, offset: 0.0, scale: 1.0 },
    };
    BasisKernel::new(spec)
}

fn rows(g: &GramMatrix) -> Vec<Vec<f64>> {
    (0..g.size()).map(|i| g.row(i).to_vec()).collect()
}

fn assert_feasible(alphas: &[f64], y: &[f64], c: f64) {
    let balance: f64 = alphas.iter().zip(y).map(|(a, y)| a * y).sum();
    assert!(balance.abs() < 1e-8, "sum alpha y = {balance}");
    assert!(alphas.iter().all(|&a| (0.0..=c).contains(&a)), "{alphas:?}");
}

#[test]
fn smo_matches_exhaustive_active_set_search() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let (x, y) = random_problem(&mut rng, n);
        let kernel = random_kernel(&mut rng);
        let c = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let gram = compute_gram(&x, &kernel).unwrap();
        let sol = solve_svm_dual(&gram, &y, c, &SmoOptions::default()).unwrap().value;
        assert_feasible(&sol.alphas, &y, c);
        let best = support::exhaustive_dual_optimum(&rows(&gram), &y, c);
        worst = worst.max((sol.objective - best).abs());
        assert!((sol.objective - best).abs() < 1e-4, "smo {} vs exhaustive {best}", sol.objective);
    }
    eprintln!("largest objective gap {worst:e}");
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn smo_is_not_beaten_by_a_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.random_range(2..=4);
        let (x, y) = random_problem(&mut rng, n);
        let gram = compute_gram(&x, &random_kernel(&mut rng)).unwrap();
        let c = 1.0;
        let sol = solve_svm_dual(&gram, &y, c, &SmoOptions::default()).unwrap().value;
        let grid = support::grid_dual_optimum(&rows(&gram), &y, c, 40);
        assert!(sol.objective >= grid - 1e-6, "smo {} below grid {grid}", sol.objective);
    }
}

#[test]
fn two_points_have_closed_form() {
    // Linear kernel, x = +-1: alpha = min(C, 2 / ||x1 - x2||^2) = 0.5, bias 0.
    let x = vec![vec![1.0], vec![-1.0]];
    let y = [1.0, -1.0];
    let gram = compute_gram(&x, &BasisKernel::new(KernelSpec::Polynomial { degree: 1, offset: 0.0, scale: 1.0 })).unwrap();
    let sol = solve_svm_dual(&gram, &y, 10.0, &SmoOptions::default()).unwrap().value;
    assert!((sol.alphas[0] - 0.5).abs() < 1e-9);
    assert!((sol.alphas[1] - 0.5).abs() < 1e-9);
    assert!(sol.bias.abs() < 1e-9);
    assert!((sol.objective - 0.5).abs() < 1e-9);
}

#[test]
fn free_support_vectors_sit_on_the_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (x, y) = random_problem(&mut rng, 40);
    let kernel = BasisKernel::new(KernelSpec::Rbf { gamma: 0.5 });
    let gram = compute_gram(&x, &kernel).unwrap();
    let c = 5.0;
    let sol = solve_svm_dual(&gram, &y, c, &SmoOptions::default()).unwrap().value;
    assert_feasible(&sol.alphas, &y, c);
    assert!((sol.objective - dual_objective(&gram, &y, &sol.alphas)).abs() < 1e-9);
    let h = |i: usize| (0..y.len()).map(|j| sol.alphas[j] * y[j] * gram.get(i, j)).sum::<f64>() + sol.bias;
    for i in 0..y.len() {
        let margin = y[i] * h(i);
        if sol.alphas[i] > 1e-8 && sol.alphas[i] < c - 1e-8 {
            assert!((margin - 1.0).abs() < 1e-3, "free sample {i} margin {margin}");
        } else if sol.alphas[i] == 0.0 {
            assert!(margin >= 1.0 - 1e-3);
        } else {
            assert!(margin <= 1.0 + 1e-3);
        }
    }
}

#[test]
fn single_kernel_mkl_is_a_plain_svm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let (x, y) = random_problem(&mut rng, 30);
        let gram = compute_gram(&x, &random_kernel(&mut rng)).unwrap();
        let options = MklOptions::default();
        let svm = solve_svm_dual(&gram, &y, options.c, &options.smo).unwrap().value;
        let mkl = train_binary_mkl(std::slice::from_ref(&gram), &y, &options).unwrap().value;
        assert_eq!(mkl.kernel_weights, vec![1.0]);
        assert!((mkl.objective - svm.objective).abs() < 1e-6);
    }
}

/// Labels depend on the first two coordinates only; the remaining ones are noise.
fn informative_and_noise(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut v = vec![label * 1.5 + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        v.extend((0..4).map(|_| rng.random_range(-3.0..3.0)));
        x.push(v);
        y.push(label);
    }
    (x, y)
}

#[test]
fn informative_kernel_wins_and_outer_loop_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let (x, y) = informative_and_noise(&mut rng, 60);
        let informative = BasisKernel::on_columns(KernelSpec::Rbf { gamma: 0.5 }, 0, 2);
        let noise = BasisKernel::on_columns(KernelSpec::Rbf { gamma: 0.5 }, 2, 4);
        let grams = [compute_gram(&x, &informative).unwrap(), compute_gram(&x, &noise).unwrap()];
        let sol = train_binary_mkl(&grams, &y, &MklOptions::default()).unwrap().value;
        assert!(sol.kernel_weights[0] >= 0.8, "weights {:?}", sol.kernel_weights);
        for it in &sol.history {
            assert!(it.weights.iter().all(|&d| d >= 0.0));
            assert!((it.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for w in sol.history.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-9, "{} then {}", w[0].objective, w[1].objective);
        }
        assert_feasible(&sol.alphas, &y, sol.c);
    }
}

#[test]
fn identical_kernels_keep_uniform_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, y) = random_problem(&mut rng, 30);
    let gram = compute_gram(&x, &BasisKernel::new(KernelSpec::Rbf { gamma: 1.0 })).unwrap();
    let sol = train_binary_mkl(&[gram.clone(), gram.clone(), gram], &y, &MklOptions::default()).unwrap().value;
    for d in &sol.kernel_weights {
        assert!((d - 1.0 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn simplex_projection_matches_sorting_oracle() {
    // Independent route: bisection on the threshold of max(v - theta, 0).
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..500 {
        let m = rng.random_range(1..8);
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s: f64 = v.iter().map(|&x| (x - mid).max(0.0)).sum();
            if s > 1.0 { lo = mid } else { hi = mid }
        }
        let oracle: Vec<f64> = v.iter().map(|&x| (x - lo).max(0.0)).collect();
        let got = project_to_simplex(&v);
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{got:?} vs {oracle:?}");
        }
    }
}
