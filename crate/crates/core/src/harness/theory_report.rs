use std::fmt;

use super::config::ExperimentConfig;
use crate::algorithm::{theory_bounds, TheoryBounds, TheoryInputs};
use crate::error::{Error, Result};
use crate::graph::{build_mixing_pair, generate_digraph, Digraph};
use crate::linalg::norm2;

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryReport {
    pub inputs: TheoryInputs,
    /// Bounds at their own maxima (nothing pinned).
    pub maxima: TheoryBounds,
    /// Bounds evaluated at the configured `γ_x`, `γ_y`, `λ̂`.
    pub configured: TheoryBounds,
    /// `λ̄ = uᵣᵀ Λ u_c / n`.
    pub lambda_bar: f64,
    pub m_derived: bool,
}

impl TheoryReport {
    /// Configured parameters inside the provable region, including `λ̄ ≥ M λ̂`.
    pub fn admissible(&self) -> bool {
        self.configured.operating_point_admissible()
            && self.lambda_bar >= self.inputs.m * self.configured.lambda_hat * (1.0 - 1e-12)
    }
}

/// Collects the bound calculator inputs: user constants from `[theory]`, and
/// `n`, `‖u_R‖`, `‖u_C‖`, `α`, `r`, `λ` from the rest of the config.
pub fn theory_report(config: &ExperimentConfig, origin: &str) -> Result<TheoryReport> {
    let missing_err = |names: &[&str]| Error::Config {
        path: origin.into(),
        message: format!(
            "theory report needs these constants in [theory]: {}",
            names.join(", ")
        ),
    };
    let Some(t) = &config.theory else {
        return Err(missing_err(&[
            "L", "mu", "theta_r", "theta_c", "delta_r2", "delta_c2", "C", "delta", "sigma2",
            "sigma2_r",
        ]));
    };
    let fields = [
        ("L", t.l),
        ("mu", t.mu),
        ("theta_r", t.theta_r),
        ("theta_c", t.theta_c),
        ("delta_r2", t.delta_r2),
        ("delta_c2", t.delta_c2),
        ("C", t.c),
        ("delta", t.delta),
        ("sigma2", t.sigma2),
        ("sigma2_r", t.sigma2_r),
    ];
    let missing: Vec<&str> = fields
        .iter()
        .filter(|(_, v)| v.is_none())
        .map(|(name, _)| *name)
        .collect();
    if !missing.is_empty() {
        return Err(missing_err(&missing));
    }
    let get = |v: Option<f64>| v.expect("checked above");

    let graph = match &config.graph.edge_list {
        Some(path) => Digraph::read_edge_list(path)?,
        None => generate_digraph(
            config.problem.n,
            config.graph.extra_edge_prob,
            config.graph.seed,
        )?,
    };
    let pair = build_mixing_pair(&graph)?;
    let n = pair.n();
    let params = config.params();
    let lambda_hat = params.max_lambda();
    let lambda_bar = (0..n)
        .map(|i| pair.u_r[i] * params.lambda[i] * pair.u_c[i])
        .sum::<f64>()
        / n as f64;
    let (m, m_derived) = match t.m {
        Some(m) => (m, false),
        None => (lambda_bar / lambda_hat, true),
    };

    let mut inputs = TheoryInputs {
        l: get(t.l),
        theta_r: get(t.theta_r),
        theta_c: get(t.theta_c),
        delta_r2: get(t.delta_r2),
        delta_c2: get(t.delta_c2),
        c: get(t.c),
        delta: get(t.delta),
        r: params.r,
        sigma2: get(t.sigma2),
        sigma2_r: get(t.sigma2_r),
        alpha_x: params.alpha_x,
        alpha_y: params.alpha_y,
        m,
        norm_u_r: norm2(&pair.u_r),
        norm_u_c: norm2(&pair.u_c),
        n,
        mu: get(t.mu),
        gamma_x: None,
        gamma_y: None,
        lambda_hat: None,
    };
    let maxima = theory_bounds(&inputs)?;
    inputs.gamma_x = Some(params.gamma_x);
    inputs.gamma_y = Some(params.gamma_y);
    inputs.lambda_hat = Some(lambda_hat);
    let configured = theory_bounds(&inputs)?;
    Ok(TheoryReport {
        inputs,
        maxima,
        configured,
        lambda_bar,
        m_derived,
    })
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.inputs;
        let (mx, c) = (&self.maxima, &self.configured);
        writeln!(f, "inputs")?;
        writeln!(
            f,
            "  L = {:e}  mu = {:e}  n = {}  |u_R| = {:.6}  |u_C| = {:.6}",
            i.l, i.mu, i.n, i.norm_u_r, i.norm_u_c
        )?;
        writeln!(
            f,
            "  theta_R = {:e}  theta_C = {:e}  delta_R2 = {:e}  delta_C2 = {:e}",
            i.theta_r, i.theta_c, i.delta_r2, i.delta_c2
        )?;
        writeln!(
            f,
            "  C = {:e}  delta = {:e}  r = {:e}  sigma2 = {:e}  sigma2_r = {:e}",
            i.c, i.delta, i.r, i.sigma2, i.sigma2_r
        )?;
        writeln!(
            f,
            "  alpha_x = {:e}  alpha_y = {:e}  M = {:e}{}",
            i.alpha_x,
            i.alpha_y,
            i.m,
            if self.m_derived { " (from configured step sizes)" } else { "" }
        )?;
        writeln!(f, "largest admissible parameters")?;
        writeln!(f, "  gamma_y_max    = {:e}", mx.gamma_y_max)?;
        writeln!(f, "  gamma_x_max    = {:e}  (at gamma_y = gamma_y_max)", mx.gamma_x_max)?;
        writeln!(f, "  lambda_hat_max = {:e}  (at both maxima)", mx.lambda_hat_max)?;
        writeln!(f, "  rho_tilde      = 1 - {:e}", mx.one_minus_rho)?;
        writeln!(
            f,
            "  e1..e5 = {:e}, {:e}, {:e}, {:e}, {:e}",
            mx.e1, mx.e2, mx.e3, mx.e4, mx.e5
        )?;
        writeln!(
            f,
            "  A = {:e}  B = {:e}  D = {:e}  E = {:e}  beta = {:e}",
            mx.a, mx.b, mx.d, mx.e, mx.beta
        )?;
        writeln!(f, "configured parameters")?;
        let mark = |ok: bool| if ok { "ok" } else { "OUTSIDE" };
        writeln!(
            f,
            "  gamma_y    = {:e}  bound {:e}  {}",
            c.gamma_y,
            c.gamma_y_max,
            mark(c.gamma_y <= c.gamma_y_max)
        )?;
        writeln!(
            f,
            "  gamma_x    = {:e}  bound {:e}  {}",
            c.gamma_x,
            c.gamma_x_max,
            mark(c.gamma_x <= c.gamma_x_max)
        )?;
        writeln!(
            f,
            "  lambda_hat = {:e}  bound {:e}  {}",
            c.lambda_hat,
            c.lambda_hat_max,
            mark(c.lambda_hat <= c.lambda_hat_max)
        )?;
        writeln!(
            f,
            "  lambda_bar = {:e}  needs >= M*lambda_hat = {:e}",
            self.lambda_bar,
            i.m * c.lambda_hat
        )?;
        writeln!(f, "  rho_tilde  = 1 - {:e}", c.one_minus_rho)?;
        writeln!(
            f,
            "inside provable region: {}",
            if self.admissible() { "yes" } else { "no" }
        )
    }
}
