//! Independent reference implementations the library is checked against.

use rcpp::algorithm::TheoryInputs;
use rcpp::graph::MixingPair;
use rcpp::linalg::Matrix;
use rcpp::problems::{LogisticProblem, Objective};

/// Push-pull written directly: `X⁺ = R(X − ΛY)`, `Y⁺ = C(Y + ∇F(X⁺) − ∇F(X))`.
pub fn push_pull_oracle<O: Objective>(
    prob: &O,
    pair: &MixingPair,
    lambda: &[f64],
    x0: &Matrix,
    steps: usize,
) -> Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = x0.rows();
    let p = x0.cols();
    let grad = |x: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n).map(|i| prob.local_gradient(i, &x[i]).unwrap()).collect()
    };
    let mix = |m: &Matrix, v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..p)
                    .map(|t| (0..n).map(|j| m[(i, j)] * v[j][t]).sum())
                    .collect()
            })
            .collect()
    };
    let mut x: Vec<Vec<f64>> = (0..n).map(|i| x0.row(i).to_vec()).collect();
    let mut g = grad(&x);
    let mut y = g.clone();
    let mut out = Vec::new();
    for _ in 0..steps {
        let local: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..p).map(|t| x[i][t] - lambda[i] * y[i][t]).collect())
            .collect();
        let x_next = mix(&pair.r, &local);
        let g_next = grad(&x_next);
        let tracked: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..p).map(|t| y[i][t] + g_next[i][t] - g[i][t]).collect())
            .collect();
        y = mix(&pair.c, &tracked);
        x = x_next;
        g = g_next;
        out.push((x.clone(), y.clone()));
    }
    out
}

/// Central finite differences of `fᵢ` at `x`.
pub fn fd_gradient(prob: &LogisticProblem, i: usize, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|t| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[t] += h;
            b[t] -= h;
            (prob.local_value(i, &a).unwrap() - prob.local_value(i, &b).unwrap()) / (2.0 * h)
        })
        .collect()
}

/// Sum of squared entries of `X − 1·aᵀ`, written as an index loop.
pub fn naive_consensus(x: &Matrix, avg: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..x.rows() {
        for t in 0..x.cols() {
            let d = x[(i, t)] - avg[t];
            total += d * d;
        }
    }
    total
}

pub fn naive_weighted_average(u: &[f64], x: &Matrix) -> Vec<f64> {
    let n = x.rows() as f64;
    (0..x.cols())
        .map(|t| (0..x.rows()).map(|i| u[i] * x[(i, t)]).sum::<f64>() / n)
        .collect()
}

/// Step-size bounds and the rate factor, transcribed separately. Products are
/// written left to right as printed so floating-point results agree exactly.
pub struct Expected {
    pub gamma_y: f64,
    pub gamma_x: f64,
    pub lambda: f64,
    pub e: [f64; 5],
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub big_e: f64,
    pub beta: f64,
    pub rho: f64,
    pub gap: f64,
}

pub fn transcribe(t: &TheoryInputs) -> Expected {
    let sqrt = f64::sqrt;
    let minimum = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let e1 = 2.0 * t.delta_c2 * t.delta_c2 * (1.0 + 18.0 * t.c);
    let e2 = 108.0 * t.c + 112.0;
    let gy_max = minimum(&[
        1.0,
        t.theta_c * e2 / (432.0 * e1),
        t.theta_c * (t.alpha_y * t.r * t.delta).powi(2) / (432.0 * e2 * t.c),
        t.alpha_y * t.r * t.delta / sqrt(1728.0 * t.c),
    ]);
    let gy = t.gamma_y.unwrap_or(gy_max);
    let e5 = minimum(&[t.theta_r / (432.0 * sqrt(2.0) * t.delta_r2), 1.0 / 72.0]);
    let gx_max = minimum(&[
        1.0,
        e5 * t.alpha_x * t.r * t.delta / sqrt(t.c),
        sqrt(t.m * t.norm_u_c) / sqrt(108.0 * t.norm_u_r * e1) * t.theta_c * gy,
    ]);
    let gx = t.gamma_x.unwrap_or(gx_max);
    let e3 = minimum(&[1.0 / (2.0 * t.delta_r2) * t.theta_r / (1.0 - t.theta_r * gx), 1.0]);
    let e4 = minimum(&[
        t.theta_r / (36.0 * (1.0 - t.theta_r * gx)),
        1.0 / (3.0 * sqrt(3.0)),
    ]);
    let n2 = (t.n * t.n) as f64;
    let big_e = t.norm_u_r * t.norm_u_c / (n2 * t.m);
    let lam_max = minimum(&[
        1.0 / 6.0,
        1.0 / (6.0 * sqrt(t.c)),
        1.0 / t.m,
        t.theta_c / sqrt(54.0 * e1),
        e3 * gx / (sqrt(96.0 * big_e) * t.norm_u_c),
        e4 * t.theta_c * gy / sqrt(48.0 * e1),
    ]) / t.l;
    let lam = t.lambda_hat.unwrap_or(lam_max);
    let a = t.theta_c * gy * t.theta_r / (108.0 * e1 * gx);
    let b = t.l * t.l * t.alpha_x * t.r * t.delta * t.theta_r / (1296.0 * gx);
    let d = t.theta_c * gy * t.alpha_y * t.r * t.delta * t.theta_r / (108.0 * e2 * gx);
    let beta = t.theta_r * gx / 8.0;
    let rho = [
        1.0 - 0.5 * t.m * lam * t.mu,
        1.0 - t.theta_r * gx / 16.0,
        1.0 - t.theta_c * gy / 8.0,
        1.0 - t.alpha_x * t.r * t.delta / 4.0,
        1.0 - t.alpha_y * t.r * t.delta / 16.0,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    let gap = minimum(&[
        0.5 * t.m * lam * t.mu,
        t.theta_r * gx / 16.0,
        t.theta_c * gy / 8.0,
        t.alpha_x * t.r * t.delta / 4.0,
        t.alpha_y * t.r * t.delta / 16.0,
    ]);
    Expected {
        gamma_y: gy_max,
        gamma_x: gx_max,
        lambda: lam_max,
        e: [e1, e2, e3, e4, e5],
        a,
        b,
        d,
        big_e,
        beta,
        rho,
        gap,
    }
}

