#![allow(dead_code)]

pub mod oracles;

use rcpp::graph::{build_mixing_pair, generate_digraph, MixingPair};
use rcpp::linalg::Matrix;
use rcpp::problems::{generate_problem, initial_point, LogisticProblem, ProblemParams, Regularizer};

pub fn desk_params(regularizer: Regularizer) -> ProblemParams {
    ProblemParams {
        p: 50,
        n: 20,
        j: 10,
        sigma: 1.0,
        rho: 0.01,
        regularizer,
        seed: 1,
    }
}

pub fn desk_problem(regularizer: Regularizer) -> LogisticProblem {
    generate_problem(desk_params(regularizer)).unwrap()
}

pub fn desk_pair() -> MixingPair {
    build_mixing_pair(&generate_digraph(20, 0.1, 2).unwrap()).unwrap()
}

pub fn desk_x0() -> Matrix {
    initial_point(20, 50, 3, false)
}

/// Smaller instance for tests that run many configurations.
pub fn small_problem(n: usize, p: usize, seed: u64) -> LogisticProblem {
    generate_problem(ProblemParams {
        p,
        n,
        j: 5,
        sigma: 1.0,
        rho: 0.05,
        regularizer: Regularizer::Convex,
        seed,
    })
    .unwrap()
}

pub fn small_pair(n: usize, seed: u64) -> MixingPair {
    build_mixing_pair(&generate_digraph(n, 0.3, seed).unwrap()).unwrap()
}

/// Column sums `1ᵀM`.
pub fn column_sums(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for (o, v) in out.iter_mut().zip(m.row(i)) {
            *o += v;
        }
    }
    out
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
