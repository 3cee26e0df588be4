mod common;

use common::oracles::fd_gradient;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rcpp::linalg::{norm2, Matrix};
use rcpp::problems::{
    generate_problem, sigmoid, solve_reference, LogisticProblem, Objective, ProblemParams,
    QuadraticProblem, Regularizer, REFERENCE_TOLERANCE,
};

fn random_point(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vec<f64> {
    (0..p).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

#[test]
fn gradients_match_finite_differences_on_100_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..100u64 {
        let regularizer = if case % 2 == 0 {
            Regularizer::Convex
        } else {
            Regularizer::Nonconvex
        };
        let prob = generate_problem(ProblemParams {
            p: rng.gen_range(1..12),
            n: rng.gen_range(1..5),
            j: rng.gen_range(1..8),
            sigma: rng.gen_range(0.2..2.0),
            rho: rng.gen_range(0.0..1.0),
            regularizer,
            seed: case,
        })
        .unwrap();
        let i = rng.gen_range(0..prob.agents());
        let x = random_point(&mut rng, prob.dim(), 1.0);
        let g = prob.local_gradient(i, &x).unwrap();
        let fd = fd_gradient(&prob, i, &x, 1e-5);
        let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = norm2(&err) / norm2(&g).max(1e-8);
        assert!(rel <= 1e-6, "case {case}: relative error {rel:e}");
    }
}

#[test]
fn origin_gradient_has_closed_form() {
    let prob = generate_problem(ProblemParams {
        p: 6,
        n: 3,
        j: 4,
        sigma: 1.0,
        rho: 0.0,
        regularizer: Regularizer::Convex,
        seed: 8,
    })
    .unwrap();
    let zero = vec![0.0; 6];
    for i in 0..3 {
        let g = prob.local_gradient(i, &zero).unwrap();
        let mut expect = vec![0.0; 6];
        for j in 0..4 {
            let row = i * 4 + j;
            for t in 0..6 {
                expect[t] -= prob.labels[row] * prob.features[(row, t)] / 8.0;
            }
        }
        assert!(common::max_abs(&g, &expect) < 1e-15);
    }
    // the nonconvex regularizer has zero gradient at the origin
    let mut params = prob.params.clone();
    params.regularizer = Regularizer::Nonconvex;
    params.rho = 3.0;
    let nc = generate_problem(params).unwrap();
    let g = nc.local_gradient(0, &zero).unwrap();
    assert!(common::max_abs(&g, &prob.local_gradient(0, &zero).unwrap()) < 1e-15);
}

#[test]
fn stable_sigmoid_does_not_overflow() {
    assert_eq!(sigmoid(0.0), 0.5);
    assert!(sigmoid(700.0) <= 1.0 && sigmoid(700.0) > 0.999);
    assert!(sigmoid(-700.0) >= 0.0 && sigmoid(-700.0).is_finite());
    let prob = common::small_problem(2, 3, 1);
    let huge = vec![1e3; 3];
    assert!(prob.global_value(&huge).unwrap().is_finite());
    assert!(prob.global_gradient(&huge).unwrap().iter().all(|v| v.is_finite()));
}

#[test]
fn smoothness_probe_stays_under_the_analytic_bound() {
    for regularizer in [Regularizer::Convex, Regularizer::Nonconvex] {
        let prob = common::desk_problem(regularizer);
        let bound = prob.smoothness_bound();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let i = rng.gen_range(0..prob.agents());
            let x = random_point(&mut rng, prob.dim(), 1.0);
            let step = rng.gen_range(1e-3..1.0);
            let dir = random_point(&mut rng, prob.dim(), step);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b).collect();
            let gx = prob.local_gradient(i, &x).unwrap();
            let gy = prob.local_gradient(i, &y).unwrap();
            let diff: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
            let ratio = norm2(&diff) / norm2(&dir);
            assert!(ratio <= bound, "ratio {ratio} exceeds {bound}");
        }
    }
}

#[test]
fn pl_inequality_holds_with_mu_equal_rho() {
    let prob = common::desk_problem(Regularizer::Convex);
    let reference = solve_reference(&prob, REFERENCE_TOLERANCE).unwrap();
    let mu = prob.params.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let scale = rng.gen_range(0.01..3.0);
        let x = random_point(&mut rng, prob.dim(), scale);
        let g = norm2(&prob.global_gradient(&x).unwrap());
        let gap = prob.global_value(&x).unwrap() - reference.f_star;
        assert!(g * g >= 2.0 * mu * gap - 1e-12, "‖∇f‖² = {} < 2μ·gap = {}", g * g, 2.0 * mu * gap);
    }
}

#[test]
fn reference_solution_is_optimal() {
    let prob = common::desk_problem(Regularizer::Convex);
    let sol = solve_reference(&prob, REFERENCE_TOLERANCE).unwrap();
    assert!(sol.gradient_norm_at_solution <= REFERENCE_TOLERANCE);
    assert!(norm2(&prob.global_gradient(&sol.x_star).unwrap()) <= REFERENCE_TOLERANCE);
    assert!(sol.f_star <= prob.global_value(&vec![0.0; prob.dim()]).unwrap());
    assert!(sol.f_star <= prob.global_value(&prob.ground_truth).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let x = random_point(&mut rng, prob.dim(), 1.0);
        assert!(sol.f_star <= prob.global_value(&x).unwrap());
    }

    let centers =
        Matrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 0.0], vec![-1.0, 5.0]]).unwrap();
    let quad = QuadraticProblem { centers };
    let q = solve_reference(&quad, 1e-12).unwrap();
    assert!(common::max_abs(&q.x_star, &[1.0, 1.0]) < 1e-11);

    let nonconvex = common::desk_problem(Regularizer::Nonconvex);
    assert!(matches!(
        solve_reference(&nonconvex, 1e-10),
        Err(rcpp::Error::Unsupported(_))
    ));
}

#[test]
fn global_quantities_average_the_locals() {
    let prob = common::desk_problem(Regularizer::Convex);
    let x: Vec<f64> = (0..prob.dim()).map(|t| (t as f64 * 0.37).sin()).collect();
    let mut value = 0.0;
    let mut grad = vec![0.0; prob.dim()];
    for i in 0..prob.agents() {
        value += prob.local_value(i, &x).unwrap();
        for (g, l) in grad.iter_mut().zip(prob.local_gradient(i, &x).unwrap()) {
            *g += l;
        }
    }
    let n = prob.agents() as f64;
    assert!((prob.global_value(&x).unwrap() - value / n).abs() <= 1e-14);
    let mean: Vec<f64> = grad.iter().map(|g| g / n).collect();
    assert!(common::max_abs(&prob.global_gradient(&x).unwrap(), &mean) <= 1e-14);

    let single = common::small_problem(1, 4, 3);
    let y = vec![0.3; 4];
    assert_eq!(single.global_value(&y).unwrap(), single.local_value(0, &y).unwrap());
    assert_eq!(single.global_gradient(&y).unwrap(), single.local_gradient(0, &y).unwrap());
}

#[test]
fn label_fractions_are_balanced_at_full_scale() {
    for seed in 1..=3 {
        let prob = generate_problem(ProblemParams {
            p: 500,
            n: 100,
            j: 10,
            sigma: 1.0,
            rho: 0.01,
            regularizer: Regularizer::Convex,
            seed,
        })
        .unwrap();
        assert_eq!(prob.features.shape(), (1000, 500));
        assert!(prob.labels.iter().all(|v| *v == 1.0 || *v == -1.0));
        let positive = prob.labels.iter().filter(|v| **v > 0.0).count() as f64 / 1000.0;
        assert!((0.3..=0.7).contains(&positive), "seed {seed}: {positive}");
    }
}

#[test]
fn degenerate_and_repeated_generation() {
    let params = ProblemParams {
        p: 2,
        n: 1,
        j: 1,
        sigma: 0.0,
        rho: 0.0,
        regularizer: Regularizer::Convex,
        seed: 5,
    };
    let a = generate_problem(params.clone()).unwrap();
    assert_eq!(a.features.row(0), &[0.0, 0.0]);
    assert!(a.labels[0].abs() == 1.0);
    assert_eq!(a, generate_problem(params).unwrap());
}

#[test]
fn dataset_binary_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.bin");
    let prob = common::desk_problem(Regularizer::Nonconvex);
    prob.write_binary(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], b"RCPPDAT1");
    assert_eq!(LogisticProblem::read_binary(&path).unwrap(), prob);
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(LogisticProblem::read_binary(&path).is_err());
}
