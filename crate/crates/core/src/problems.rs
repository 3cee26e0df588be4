//! Local objectives, the synthetic logistic-regression benchmark, and a
//! centralized reference solver.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};

/// A sum-of-local-objectives problem `f(x) = (1/n) Σᵢ fᵢ(x)`.
pub trait Objective: Sync {
    fn agents(&self) -> usize;
    fn dim(&self) -> usize;
    fn local_value(&self, i: usize, x: &[f64]) -> Result<f64>;
    fn local_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>>;

    /// Whether `f` has a global minimizer the residual metric can refer to.
    fn supports_residual(&self) -> bool;

    fn global_value(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.agents() {
            total += self.local_value(i, x)?;
        }
        Ok(total / self.agents() as f64)
    }

    fn global_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.dim()];
        for i in 0..self.agents() {
            for (t, g) in total.iter_mut().zip(self.local_gradient(i, x)?) {
                *t += g;
            }
        }
        let n = self.agents() as f64;
        Ok(total.into_iter().map(|t| t / n).collect())
    }

    fn check_args(&self, i: usize, x: &[f64]) -> Result<()> {
        if i >= self.agents() {
            return Err(crate::error::domain(format!(
                "agent index {i} out of range for {} agents",
                self.agents()
            )));
        }
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: format!("point of dimension {}", self.dim()),
                got: format!("{}", x.len()),
            });
        }
        Ok(())
    }
}

/// Stacked local gradients: row `i` is `∇fᵢ(xᵢ)` for row `i` of `x`.
pub fn stacked_gradient<O: Objective + ?Sized>(obj: &O, x: &Matrix) -> Result<Matrix> {
    use rayon::prelude::*;
    if x.rows() != obj.agents() {
        return Err(Error::Dimension {
            expected: format!("{} rows", obj.agents()),
            got: format!("{}", x.rows()),
        });
    }
    let rows: Vec<Vec<f64>> = (0..obj.agents())
        .into_par_iter()
        .map(|i| obj.local_gradient(i, x.row(i)))
        .collect::<Result<_>>()?;
    Matrix::from_rows(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    /// `‖x‖²`
    Convex,
    /// `Σₜ x[t]² / (1 + x[t]²)`
    Nonconvex,
}

impl Regularizer {
    fn code(self) -> u64 {
        match self {
            Regularizer::Convex => 0,
            Regularizer::Nonconvex => 1,
        }
    }

    fn value(self, x: &[f64]) -> f64 {
        match self {
            Regularizer::Convex => x.iter().map(|v| v * v).sum(),
            Regularizer::Nonconvex => x.iter().map(|v| v * v / (1.0 + v * v)).sum(),
        }
    }

    fn add_gradient(self, weight: f64, x: &[f64], out: &mut [f64]) {
        match self {
            Regularizer::Convex => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o += weight * 2.0 * v;
                }
            }
            Regularizer::Nonconvex => {
                for (o, v) in out.iter_mut().zip(x) {
                    let d = 1.0 + v * v;
                    *o += weight * 2.0 * v / (d * d);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    pub p: usize,
    pub n: usize,
    pub j: usize,
    pub sigma: f64,
    pub rho: f64,
    pub regularizer: Regularizer,
    pub seed: u64,
}

/// Regularized logistic regression with `J` samples held by each of `n` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProblem {
    pub params: ProblemParams,
    /// Row `i·J + j` is the feature vector `u_{i,j}`.
    pub features: Matrix,
    /// Exactly `±1`.
    pub labels: Vec<f64>,
    /// Parameter vector the labels were drawn from.
    pub ground_truth: Vec<f64>,
}

pub fn generate_problem(params: ProblemParams) -> Result<LogisticProblem> {
    let ProblemParams { p, n, j, sigma, rho, .. } = params;
    if p == 0 || n == 0 || j == 0 {
        return Err(crate::error::domain("p, n and J must be positive"));
    }
    if !(sigma >= 0.0 && rho >= 0.0) {
        return Err(crate::error::domain("sigma and rho must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let ground_truth: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let mut features = Matrix::zeros(n * j, p);
    let mut labels = Vec::with_capacity(n * j);
    for row in 0..n * j {
        let u = features.row_mut(row);
        for v in u.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = sigma * z;
        }
        let margin = crate::linalg::dot(u, &ground_truth);
        let z: f64 = rng.gen();
        labels.push(if z <= sigmoid(margin) { 1.0 } else { -1.0 });
    }
    Ok(LogisticProblem {
        params,
        features,
        labels,
        ground_truth,
    })
}

/// `1 / (1 + e^{-t})` without overflow.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

const DATASET_MAGIC: &[u8; 8] = b"RCPPDAT1";

impl LogisticProblem {
    fn sample_rows(&self, i: usize) -> std::ops::Range<usize> {
        i * self.params.j..(i + 1) * self.params.j
    }

    /// Absolute-value bound on each `Lᵢ`: `max_i ‖Uᵢ‖₂² / (4J) + ρ·L_R`.
    ///
    /// `‖Uᵢ‖₂²` is bounded by the Frobenius norm, which keeps this cheap.
    pub fn smoothness_bound(&self) -> f64 {
        let j = self.params.j as f64;
        let data = (0..self.params.n)
            .map(|i| {
                self.sample_rows(i)
                    .map(|r| crate::linalg::norm2_sq(self.features.row(r)))
                    .sum::<f64>()
                    / (4.0 * j)
            })
            .fold(0.0, f64::max);
        data + self.params.rho * 2.0
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(DATASET_MAGIC);
        let pr = &self.params;
        for v in [pr.n as u64, pr.j as u64, pr.p as u64, pr.regularizer.code(), pr.seed] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in [pr.sigma, pr.rho] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in self
            .ground_truth
            .iter()
            .chain(self.features.as_slice())
            .chain(&self.labels)
        {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let bad = |m: &str| Error::Format {
            path: path.to_path_buf(),
            message: m.to_string(),
        };
        if buf.len() < 8 + 7 * 8 || &buf[..8] != DATASET_MAGIC {
            return Err(bad("missing dataset header"));
        }
        let word = |k: usize| u64::from_le_bytes(buf[8 + 8 * k..16 + 8 * k].try_into().unwrap());
        let (n, j, p) = (word(0) as usize, word(1) as usize, word(2) as usize);
        let regularizer = match word(3) {
            0 => Regularizer::Convex,
            1 => Regularizer::Nonconvex,
            _ => return Err(bad("unknown regularizer code")),
        };
        let seed = word(4);
        let sigma = f64::from_bits(word(5));
        let rho = f64::from_bits(word(6));
        let body = &buf[8 + 7 * 8..];
        let expected = p + n * j * p + n * j;
        if body.len() != expected * 8 {
            return Err(bad("body length does not match dimensions"));
        }
        let floats: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let ground_truth = floats[..p].to_vec();
        let features = Matrix::from_vec(n * j, p, floats[p..p + n * j * p].to_vec())?;
        let labels = floats[p + n * j * p..].to_vec();
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(bad("labels must be ±1"));
        }
        Ok(Self {
            params: ProblemParams {
                p,
                n,
                j,
                sigma,
                rho,
                regularizer,
                seed,
            },
            features,
            labels,
            ground_truth,
        })
    }
}

impl Objective for LogisticProblem {
    fn agents(&self) -> usize {
        self.params.n
    }

    fn dim(&self) -> usize {
        self.params.p
    }

    fn local_value(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.check_args(i, x)?;
        let loss: f64 = self
            .sample_rows(i)
            .map(|r| softplus(-self.labels[r] * crate::linalg::dot(self.features.row(r), x)))
            .sum();
        Ok(loss / self.params.j as f64 + 0.5 * self.params.rho * self.params.regularizer.value(x))
    }

    fn local_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_args(i, x)?;
        let mut g = vec![0.0; self.params.p];
        let inv_j = 1.0 / self.params.j as f64;
        for r in self.sample_rows(i) {
            let u = self.features.row(r);
            let v = self.labels[r];
            let coef = -v * sigmoid(-v * crate::linalg::dot(u, x)) * inv_j;
            for (gt, ut) in g.iter_mut().zip(u) {
                *gt += coef * ut;
            }
        }
        self.params
            .regularizer
            .add_gradient(0.5 * self.params.rho, x, &mut g);
        Ok(g)
    }

    fn supports_residual(&self) -> bool {
        self.params.regularizer == Regularizer::Convex && self.params.rho > 0.0
    }
}

/// `fᵢ(x) = ½‖x − cᵢ‖²`; minimizer is the mean of the centers.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    pub centers: Matrix,
}

impl Objective for QuadraticProblem {
    fn agents(&self) -> usize {
        self.centers.rows()
    }

    fn dim(&self) -> usize {
        self.centers.cols()
    }

    fn local_value(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.check_args(i, x)?;
        Ok(0.5
            * x.iter()
                .zip(self.centers.row(i))
                .map(|(a, c)| (a - c).powi(2))
                .sum::<f64>())
    }

    fn local_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_args(i, x)?;
        Ok(x.iter().zip(self.centers.row(i)).map(|(a, c)| a - c).collect())
    }

    fn supports_residual(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub gradient_norm_at_solution: f64,
    pub iterations: usize,
}

pub const REFERENCE_TOLERANCE: f64 = 1e-10;
const REFERENCE_MAX_ITERATIONS: usize = 200_000;

/// Centralized gradient descent with Armijo backtracking until `‖∇f‖ ≤ tol`.
///
/// Once the Armijo decrease falls below what `f` can resolve in floating
/// point, a step is accepted when it shrinks the gradient norm instead.
pub fn solve_reference<O: Objective + ?Sized>(obj: &O, tol: f64) -> Result<ReferenceSolution> {
    if !obj.supports_residual() {
        return Err(Error::Unsupported(
            "reference optimum needs a convex, regularized objective; use gradient-norm metrics for nonconvex problems".into(),
        ));
    }
    let mut x = vec![0.0; obj.dim()];
    let mut f = obj.global_value(&x)?;
    let mut g = obj.global_gradient(&x)?;
    let mut gnorm = norm2(&g);
    let mut step = 1.0;
    for it in 0..REFERENCE_MAX_ITERATIONS {
        if gnorm <= tol {
            return Ok(ReferenceSolution {
                x_star: x,
                f_star: f,
                gradient_norm_at_solution: gnorm,
                iterations: it,
            });
        }
        let g2 = gnorm * gnorm;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let fc = obj.global_value(&cand)?;
            let resolvable = step * g2 > 1e-12 * (1.0 + f.abs());
            let ok = if resolvable {
                fc <= f - 1e-4 * step * g2
            } else {
                let gc = obj.global_gradient(&cand)?;
                norm2(&gc) < gnorm
            };
            if ok {
                x = cand;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        g = obj.global_gradient(&x)?;
        gnorm = norm2(&g);
        step *= 2.0;
    }
    Err(Error::SolverStalled {
        tol,
        iterations: REFERENCE_MAX_ITERATIONS,
        grad_norm: gnorm,
    })
}

/// Initial iterate with entries uniform in `[0, 1]`, independent per agent
/// unless `shared` puts the same draw on every row.
pub fn initial_point(n: usize, p: usize, seed: u64, shared: bool) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if shared {
        let row: Vec<f64> = (0..p).map(|_| rng.gen()).collect();
        Matrix::repeat_row(n, &row)
    } else {
        let data = (0..n * p).map(|_| rng.gen()).collect();
        Matrix::from_vec(n, p, data).expect("shape matches")
    }
}
