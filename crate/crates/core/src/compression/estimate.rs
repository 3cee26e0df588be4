//! Monte-Carlo diagnostics for the relative/absolute error constants of a
//! compressor. Sampling cannot certify a bound that must hold for every
//! input; these numbers are estimates with standard errors, nothing more.

use rand::Rng;
use rand_distr::StandardNormal;

use super::codec::{compress, decode};
use super::spec::CompressorSpec;
use crate::error::{domain, Result};
use crate::linalg::norm2_sq;

pub const MIN_SAMPLES: usize = 1000;
/// Compressions averaged per sampled input to approximate the expectation.
const REALIZATIONS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionConstants {
    /// Relative error constant `C`.
    pub c_hat: f64,
    pub c_hat_stderr: f64,
    /// Absolute error `σ²`, the mean squared error at `x = 0`.
    pub sigma2_hat: f64,
    pub sigma2_stderr: f64,
    pub r: f64,
    /// Contraction `δ` of the `r`-scaled compressor, clipped into `(0, 1]`.
    pub delta_hat: f64,
    pub delta_stderr: f64,
    /// Absolute error of the `r`-scaled compressor at `x = 0`.
    pub sigma2_r_hat: f64,
    pub sample_count: usize,
    pub dim: usize,
}

/// Sample inputs `x = input_scale · z`, `z ~ N(0, I_dim)`, and fit the
/// smallest slopes consistent with every sample after removing the error
/// measured at the origin.
pub fn estimate_constants<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    dim: usize,
    r: f64,
    samples: usize,
    input_scale: f64,
    rng: &mut R,
) -> Result<CompressionConstants> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if dim == 0 || !(r > 0.0) || !(input_scale > 0.0) {
        return Err(domain("dim, r and input_scale must be positive"));
    }

    // error at the origin
    let zero = vec![0.0; dim];
    let mut origin = Vec::with_capacity(samples);
    let mut origin_r = Vec::with_capacity(samples);
    for _ in 0..samples {
        let y = decode(&compress(spec, &zero, rng)?)?;
        origin.push(norm2_sq(&y));
        origin_r.push(y.iter().map(|v| (v / r).powi(2)).sum::<f64>());
    }
    let (sigma2_hat, sigma2_stderr) = mean_and_stderr(&origin);
    let (sigma2_r_hat, _) = mean_and_stderr(&origin_r);

    let mut slopes = Vec::with_capacity(samples);
    let mut slopes_r = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x: Vec<f64> = (0..dim)
            .map(|_| input_scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let energy = norm2_sq(&x);
        if energy == 0.0 {
            continue;
        }
        let mut err = 0.0;
        let mut err_r = 0.0;
        for _ in 0..REALIZATIONS {
            let y = decode(&compress(spec, &x, rng)?)?;
            err += y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            err_r += y.iter().zip(&x).map(|(a, b)| (a / r - b).powi(2)).sum::<f64>();
        }
        err /= REALIZATIONS as f64;
        err_r /= REALIZATIONS as f64;
        slopes.push((err - sigma2_hat) / energy);
        slopes_r.push((err_r - sigma2_r_hat) / energy);
    }
    let c_hat = slopes.iter().copied().fold(0.0, f64::max);
    let (_, c_hat_stderr) = mean_and_stderr(&slopes);
    let worst_r = slopes_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (_, delta_stderr) = mean_and_stderr(&slopes_r);
    let delta_hat = (1.0 - worst_r).clamp(f64::EPSILON, 1.0);

    Ok(CompressionConstants {
        c_hat,
        c_hat_stderr,
        sigma2_hat,
        sigma2_stderr,
        r,
        delta_hat,
        delta_stderr,
        sigma2_r_hat,
        sample_count: samples,
        dim,
    })
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
