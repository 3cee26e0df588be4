//! Provable parameter region and linear-rate factor.
//!
//! Closed-form arithmetic only. The bounds are mutually dependent (`γ_x`
//! depends on `γ_y`, `λ̂` on both), so they are evaluated at an operating
//! point: `γ_y` first, then `γ_x` at that `γ_y`, then `λ̂` at both. Any of the
//! three may be pinned by the caller instead of taking its maximum.

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryInputs {
    /// Smoothness constant `L = max Lᵢ`.
    pub l: f64,
    pub theta_r: f64,
    pub theta_c: f64,
    pub delta_r2: f64,
    pub delta_c2: f64,
    /// Relative compression constant `C`.
    pub c: f64,
    pub delta: f64,
    pub r: f64,
    pub sigma2: f64,
    pub sigma2_r: f64,
    pub alpha_x: f64,
    pub alpha_y: f64,
    /// Lower-bound ratio `M` in `λ̄ ≥ M λ̂`.
    pub m: f64,
    pub norm_u_r: f64,
    pub norm_u_c: f64,
    pub n: usize,
    /// PL constant.
    pub mu: f64,
    pub gamma_x: Option<f64>,
    pub gamma_y: Option<f64>,
    pub lambda_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryBounds {
    pub lambda_hat_max: f64,
    pub gamma_x_max: f64,
    pub gamma_y_max: f64,
    /// Operating point the dependent quantities were evaluated at.
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub lambda_hat: f64,
    pub rho_tilde: f64,
    /// `1 − ρ̃` without cancellation; stays positive when `ρ̃` rounds to 1.
    pub one_minus_rho: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    pub e5: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
    pub beta: f64,
}

impl TheoryBounds {
    /// Whether the operating point lies inside the bounds.
    pub fn operating_point_admissible(&self) -> bool {
        self.gamma_y <= self.gamma_y_max
            && self.gamma_x <= self.gamma_x_max
            && self.lambda_hat <= self.lambda_hat_max
    }
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn check(inputs: &TheoryInputs) -> Result<()> {
    let positive = [
        ("L", inputs.l),
        ("theta_R", inputs.theta_r),
        ("theta_C", inputs.theta_c),
        ("delta_R2", inputs.delta_r2),
        ("delta_C2", inputs.delta_c2),
        ("delta", inputs.delta),
        ("r", inputs.r),
        ("alpha_x", inputs.alpha_x),
        ("alpha_y", inputs.alpha_y),
        ("M", inputs.m),
        ("|u_R|", inputs.norm_u_r),
        ("|u_C|", inputs.norm_u_c),
        ("mu", inputs.mu),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(domain(format!("{name} = {v} must be positive and finite")));
        }
    }
    for (name, v) in [("C", inputs.c), ("sigma2", inputs.sigma2), ("sigma2_r", inputs.sigma2_r)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(domain(format!("{name} = {v} must be non-negative")));
        }
    }
    for (name, v) in [("theta_R", inputs.theta_r), ("theta_C", inputs.theta_c), ("delta", inputs.delta)] {
        if v > 1.0 {
            return Err(domain(format!("{name} = {v} must not exceed 1")));
        }
    }
    for (name, v) in [("alpha_x", inputs.alpha_x), ("alpha_y", inputs.alpha_y)] {
        if v > 1.0 / inputs.r {
            return Err(domain(format!("{name} = {v} exceeds 1/r")));
        }
    }
    if inputs.n == 0 {
        return Err(domain("n must be positive"));
    }
    for (name, v) in [
        ("gamma_x", inputs.gamma_x),
        ("gamma_y", inputs.gamma_y),
        ("lambda_hat", inputs.lambda_hat),
    ] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} = {v} must be positive")));
            }
        }
    }
    for (name, v) in [("gamma_x", inputs.gamma_x), ("gamma_y", inputs.gamma_y)] {
        if v.is_some_and(|g| g > 1.0) {
            return Err(domain(format!("{name} must not exceed 1")));
        }
    }
    Ok(())
}

pub fn theory_bounds(inputs: &TheoryInputs) -> Result<TheoryBounds> {
    check(inputs)?;
    let TheoryInputs {
        l,
        theta_r,
        theta_c,
        delta_r2,
        delta_c2,
        c,
        delta,
        r,
        alpha_x,
        alpha_y,
        m,
        norm_u_r,
        norm_u_c,
        n,
        mu,
        ..
    } = *inputs;
    let sqrt_c = c.sqrt();
    // x / 0 is +inf, which drops the branch from each minimum when C = 0
    let e1 = 2.0 * delta_c2 * delta_c2 * (1.0 + 18.0 * c);
    let e2 = 108.0 * c + 112.0;
    let e5 = f64::min(theta_r / (432.0 * 2f64.sqrt() * delta_r2), 1.0 / 72.0);
    let e = norm_u_r * norm_u_c / ((n * n) as f64 * m);

    let gamma_y_max = min_of(&[
        1.0,
        theta_c * e2 / (432.0 * e1),
        theta_c * (alpha_y * r * delta).powi(2) / (432.0 * e2 * c),
        alpha_y * r * delta / (1728.0 * c).sqrt(),
    ]);
    let gamma_y = inputs.gamma_y.unwrap_or(gamma_y_max);

    let gamma_x_max = min_of(&[
        1.0,
        e5 * alpha_x * r * delta / sqrt_c,
        (m * norm_u_c).sqrt() / (108.0 * norm_u_r * e1).sqrt() * theta_c * gamma_y,
    ]);
    let gamma_x = inputs.gamma_x.unwrap_or(gamma_x_max);

    let e3 = f64::min(1.0 / (2.0 * delta_r2) * theta_r / (1.0 - theta_r * gamma_x), 1.0);
    let e4 = f64::min(
        theta_r / (36.0 * (1.0 - theta_r * gamma_x)),
        1.0 / (3.0 * 3f64.sqrt()),
    );
    let lambda_hat_max = min_of(&[
        1.0 / 6.0,
        1.0 / (6.0 * sqrt_c),
        1.0 / m,
        theta_c / (54.0 * e1).sqrt(),
        e3 * gamma_x / ((96.0 * e).sqrt() * norm_u_c),
        e4 * theta_c * gamma_y / (48.0 * e1).sqrt(),
    ]) / l;
    let lambda_hat = inputs.lambda_hat.unwrap_or(lambda_hat_max);

    let a = theta_c * gamma_y * theta_r / (108.0 * e1 * gamma_x);
    let b = l * l * alpha_x * r * delta * theta_r / (1296.0 * gamma_x);
    let d = theta_c * gamma_y * alpha_y * r * delta * theta_r / (108.0 * e2 * gamma_x);
    let beta = theta_r * gamma_x / 8.0;
    let contractions = [
        0.5 * m * lambda_hat * mu,
        theta_r * gamma_x / 16.0,
        theta_c * gamma_y / 8.0,
        alpha_x * r * delta / 4.0,
        alpha_y * r * delta / 16.0,
    ];
    let rho_tilde = contractions
        .iter()
        .map(|c| 1.0 - c)
        .fold(f64::NEG_INFINITY, f64::max);
    let one_minus_rho = min_of(&contractions);

    Ok(TheoryBounds {
        lambda_hat_max,
        gamma_x_max,
        gamma_y_max,
        gamma_x,
        gamma_y,
        lambda_hat,
        rho_tilde,
        one_minus_rho,
        e1,
        e2,
        e3,
        e4,
        e5,
        a,
        b,
        d,
        e,
        beta,
    })
}

#[cfg(test)]
pub(crate) fn sample_inputs() -> TheoryInputs {
    TheoryInputs {
        l: 2.0,
        theta_r: 0.5,
        theta_c: 0.4,
        delta_r2: 1.5,
        delta_c2: 1.0,
        c: 1.0,
        delta: 0.5,
        r: 1.0,
        sigma2: 0.1,
        sigma2_r: 0.1,
        alpha_x: 0.5,
        alpha_y: 0.5,
        m: 0.5,
        norm_u_r: 4.0,
        norm_u_c: 4.0,
        n: 16,
        mu: 0.01,
        gamma_x: None,
        gamma_y: None,
        lambda_hat: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_constants() {
        let mut inp = sample_inputs();
        inp.c = 0.0;
        inp.delta = 1.0;
        inp.delta_c2 = 1.3;
        let t = theory_bounds(&inp).unwrap();
        assert_eq!(t.e2, 112.0);
        assert_eq!(t.e1, 2.0 * 1.3 * 1.3);
        // without the C-branches the λ̂ bound is set by the remaining terms
        assert!(t.lambda_hat_max.is_finite());
        assert!(t.gamma_x_max.is_finite() && t.gamma_y_max.is_finite());
    }

    #[test]
    fn unit_relative_error_constants() {
        let t = theory_bounds(&sample_inputs()).unwrap();
        assert_eq!(t.e1, 38.0);
        assert_eq!(t.e2, 220.0);
    }

    #[test]
    fn outputs_positive_and_rate_in_unit_interval() {
        let t = theory_bounds(&sample_inputs()).unwrap();
        for v in [
            t.lambda_hat_max,
            t.gamma_x_max,
            t.gamma_y_max,
            t.e1,
            t.e2,
            t.e3,
            t.e4,
            t.e5,
            t.a,
            t.b,
            t.d,
            t.e,
            t.beta,
        ] {
            assert!(v > 0.0 && v.is_finite());
        }
        assert!(t.rho_tilde > 0.0 && t.rho_tilde < 1.0);
        assert!(t.operating_point_admissible());
    }

    #[test]
    fn domain_violations() {
        let mut inp = sample_inputs();
        inp.theta_r = 1.5;
        assert!(theory_bounds(&inp).is_err());
        let mut inp = sample_inputs();
        inp.c = -1.0;
        assert!(theory_bounds(&inp).is_err());
        let mut inp = sample_inputs();
        inp.alpha_x = 2.0;
        assert!(theory_bounds(&inp).is_err());
        let mut inp = sample_inputs();
        inp.gamma_x = Some(1.2);
        assert!(theory_bounds(&inp).is_err());
    }
}
