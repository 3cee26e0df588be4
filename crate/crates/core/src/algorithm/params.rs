use crate::compression::CompressorSpec;
use crate::error::{domain, Result};

/// Geometric scaling schedule `s_k² = a0 · a^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub a0: f64,
    pub a: f64,
}

impl Schedule {
    /// `s_k = √a0 · a^{k/2}`.
    pub fn scaling(&self, k: u64) -> f64 {
        self.a0.sqrt() * self.a.powf(k as f64 / 2.0)
    }

    pub fn is_constant(&self) -> bool {
        self.a == 1.0
    }
}

/// Whether every out-edge carries its own copy of a message or each agent broadcasts once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitMode {
    #[default]
    PerEdge,
    Broadcast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcppParams {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    /// Diagonal of the step-size matrix, one entry per agent.
    pub lambda: Vec<f64>,
    pub schedule: Schedule,
    pub x_compressor: CompressorSpec,
    pub y_compressor: CompressorSpec,
    pub iterations: u64,
    /// Scaling factor `r` of the compressors; bounds `alpha ≤ 1/r`.
    pub r: f64,
    /// Permits the constant schedule `a = 1` (fixed-scaling ablation).
    pub allow_constant_scaling: bool,
    pub bit_mode: BitMode,
}

impl RcppParams {
    /// Uniform step size, identical compressors on both chains, `r = 1`.
    pub fn uniform(
        n: usize,
        lambda: f64,
        alpha: f64,
        gamma: f64,
        schedule: Schedule,
        compressor: CompressorSpec,
        iterations: u64,
    ) -> Self {
        Self {
            alpha_x: alpha,
            alpha_y: alpha,
            gamma_x: gamma,
            gamma_y: gamma,
            lambda: vec![lambda; n],
            schedule,
            x_compressor: compressor.clone(),
            y_compressor: compressor,
            iterations,
            r: 1.0,
            allow_constant_scaling: false,
            bit_mode: BitMode::PerEdge,
        }
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(domain(format!("r = {} must be positive", self.r)));
        }
        let alpha_max = 1.0 / self.r;
        for (name, v) in [("alpha_x", self.alpha_x), ("alpha_y", self.alpha_y)] {
            if !(v > 0.0 && v <= alpha_max) {
                return Err(domain(format!("{name} = {v} outside (0, 1/r = {alpha_max}]")));
            }
        }
        for (name, v) in [("gamma_x", self.gamma_x), ("gamma_y", self.gamma_y)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(domain(format!("{name} = {v} outside (0, 1]")));
            }
        }
        if self.lambda.len() != n {
            return Err(domain(format!(
                "{} step sizes given for {n} agents",
                self.lambda.len()
            )));
        }
        if let Some(l) = self.lambda.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(domain(format!("step size {l} must be non-negative")));
        }
        let Schedule { a0, a } = self.schedule;
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(domain(format!("schedule a0 = {a0} must be positive")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(domain(format!("schedule a = {a} outside (0, 1]")));
        }
        if a == 1.0 && !self.allow_constant_scaling {
            return Err(domain(
                "constant scaling (a = 1) is only allowed in the fixed-scaling ablation",
            ));
        }
        self.x_compressor.validate()?;
        self.y_compressor.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RcppParams {
        RcppParams::uniform(
            3,
            0.1,
            0.5,
            0.8,
            Schedule { a0: 1.0, a: 0.9 },
            CompressorSpec::qn(),
            10,
        )
    }

    #[test]
    fn scaling_values() {
        let s = Schedule { a0: 4.0, a: 0.25 };
        assert_eq!(s.scaling(0), 2.0);
        let s = Schedule { a0: 1.0, a: 0.25 };
        assert_eq!(s.scaling(2), 0.25);
        let s = Schedule { a0: 2.0, a: 0.9 };
        let mut sum = 0.0;
        for k in 0..500 {
            sum += s.scaling(k).powi(2);
            assert!(sum < 2.0 / (1.0 - 0.9));
        }
    }

    #[test]
    fn ranges_enforced() {
        assert!(params().validate(3).is_ok());
        assert!(params().validate(4).is_err());
        let mut p = params();
        p.alpha_x = 0.0;
        assert!(p.validate(3).is_err());
        let mut p = params();
        p.r = 2.5;
        assert!(p.validate(3).is_err());
        p.alpha_x = 0.4;
        p.alpha_y = 0.4;
        assert!(p.validate(3).is_ok());
        let mut p = params();
        p.gamma_y = 1.5;
        assert!(p.validate(3).is_err());
        let mut p = params();
        p.lambda[1] = -0.1;
        assert!(p.validate(3).is_err());
    }

    #[test]
    fn constant_schedule_needs_ablation_flag() {
        let mut p = params();
        p.schedule.a = 1.0;
        assert!(p.validate(3).is_err());
        p.allow_constant_scaling = true;
        assert!(p.validate(3).is_ok());
    }
}
