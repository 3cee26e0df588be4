//! Quantities reported per recorded iteration.
//!
//! Consensus and tracking errors use the plain Frobenius norm. The weighted
//! norms the convergence analysis works in dominate it, so decay observed
//! here is implied by decay in those norms.

use crate::error::Result;
use crate::graph::MixingPair;
use crate::linalg::{norm2, Matrix};
use crate::problems::{Objective, ReferenceSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub k: u64,
    /// `f(x̄ᵏ) − f*`, only when a reference optimum is known.
    pub residual: Option<f64>,
    /// `‖∇f(x̄ᵏ)‖`
    pub grad_norm: f64,
    /// `‖X − 1·x̄ᵏ‖_F²`
    pub consensus_error: f64,
    /// `‖Y − u_C·ȳᵏ‖_F²`
    pub tracking_error: f64,
    /// `‖1ᵀY − 1ᵀ∇F(X)‖`
    pub tracking_gap: f64,
    pub cumulative_bits: u64,
    pub s_k: f64,
    pub wall_ms: f64,
}

/// `x̄ = (1/n) u_Rᵀ X`.
pub fn weighted_average(u_r: &[f64], x: &Matrix) -> Vec<f64> {
    let n = x.rows() as f64;
    x.left_mul_vec(u_r).into_iter().map(|v| v / n).collect()
}

/// `ȳ = (1/n) 1ᵀ Y`.
pub fn plain_average(y: &Matrix) -> Vec<f64> {
    let n = y.rows() as f64;
    y.col_sums().into_iter().map(|v| v / n).collect()
}

/// `‖X − 1·x̄ᵀ‖_F²` for the given row average.
pub fn consensus_error(x: &Matrix, avg: &[f64]) -> f64 {
    x.row_iter()
        .map(|row| row.iter().zip(avg).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
        .sum()
}

/// `‖Y − u_C·ȳᵀ‖_F²`.
pub fn tracking_error(y: &Matrix, u_c: &[f64], avg: &[f64]) -> f64 {
    y.row_iter()
        .zip(u_c)
        .map(|(row, w)| {
            row.iter()
                .zip(avg)
                .map(|(a, b)| (a - w * b).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// `‖1ᵀY − 1ᵀG‖`.
pub fn tracking_gap(y: &Matrix, grad: &Matrix) -> f64 {
    let diff: Vec<f64> = y
        .col_sums()
        .iter()
        .zip(grad.col_sums())
        .map(|(a, b)| a - b)
        .collect();
    norm2(&diff)
}

/// Snapshot of a state given its iterate `x`, trackers `y` and stacked gradient `grad`.
#[allow(clippy::too_many_arguments)]
pub fn record<O: Objective + ?Sized>(
    k: u64,
    x: &Matrix,
    y: &Matrix,
    grad: &Matrix,
    problem: &O,
    pair: &MixingPair,
    reference: Option<&ReferenceSolution>,
    cumulative_bits: u64,
    s_k: f64,
) -> Result<MetricsRecord> {
    let x_bar = weighted_average(&pair.u_r, x);
    let y_bar = plain_average(y);
    let grad_norm = norm2(&problem.global_gradient(&x_bar)?);
    let residual = match reference {
        Some(r) => Some(problem.global_value(&x_bar)? - r.f_star),
        None => None,
    };
    Ok(MetricsRecord {
        k,
        residual,
        grad_norm,
        consensus_error: consensus_error(x, &x_bar),
        tracking_error: tracking_error(y, &pair.u_c, &y_bar),
        tracking_gap: tracking_gap(y, grad),
        cumulative_bits,
        s_k,
        wall_ms: 0.0,
    })
}
