use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithm::{BitMode, RcppParams, Schedule};
use crate::compression::CompressorSpec;
use crate::error::{Error, Result};
use crate::problems::{ProblemParams, Regularizer, REFERENCE_TOLERANCE};

/// One experiment: problem, graph, compressors, algorithm parameters and run
/// options. Every section has defaults, so a config file only lists what it
/// changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub compressor: CompressorSection,
    #[serde(default)]
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub run: RunSection,
    /// Where results go. Not part of the trace header since it does not change
    /// the data.
    #[serde(default, skip_serializing)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheorySection>,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub p: usize,
    pub n: usize,
    /// Samples per agent.
    #[serde(alias = "J")]
    pub j: usize,
    pub sigma: f64,
    pub rho: f64,
    pub regularizer: Regularizer,
    pub seed: u64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            p: 50,
            n: 20,
            j: 10,
            sigma: 1.0,
            rho: 0.01,
            regularizer: Regularizer::Convex,
            seed: 1,
        }
    }
}

impl ProblemSection {
    pub fn params(&self) -> ProblemParams {
        ProblemParams {
            p: self.p,
            n: self.n,
            j: self.j,
            sigma: self.sigma,
            rho: self.rho,
            regularizer: self.regularizer,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphSection {
    /// Probability of each non-ring edge.
    pub extra_edge_prob: f64,
    pub seed: u64,
    /// Read the graph from an edge-list file instead of generating it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<PathBuf>,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            extra_edge_prob: 0.1,
            seed: 2,
            edge_list: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompressorSection {
    pub x: CompressorSpec,
    pub y: CompressorSpec,
}

impl Default for CompressorSection {
    fn default() -> Self {
        Self {
            x: CompressorSpec::qn(),
            y: CompressorSpec::qn(),
        }
    }
}

/// A single step size shared by all agents, or one per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSizes {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl StepSizes {
    pub fn resolve(&self, n: usize) -> Vec<f64> {
        match self {
            StepSizes::Uniform(l) => vec![*l; n],
            StepSizes::PerAgent(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmSection {
    pub lambda: StepSizes,
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub a0: f64,
    pub a: f64,
    pub iterations: u64,
    pub r: f64,
    /// Allows `a = 1` (the constant-scaling ablation).
    pub constant_scaling: bool,
    pub bit_mode: BitMode,
}

impl Default for AlgorithmSection {
    // Tuned on the default instance: clean linear decay without hitting the
    // floating-point floor before 5000 iterations.
    fn default() -> Self {
        Self {
            lambda: StepSizes::Uniform(0.12),
            alpha_x: 0.5,
            alpha_y: 0.5,
            gamma_x: 0.5,
            gamma_y: 0.5,
            a0: 1.0,
            a: 0.99,
            iterations: 5000,
            r: 1.0,
            constant_scaling: false,
            bit_mode: BitMode::PerEdge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Convex objective, residual `f(x̄) − f*` against a reference solve.
    ConvexResidual,
    /// Gradient norm only; no reference solve.
    NonconvexGradnorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub mode: Mode,
    pub record_every: u64,
    /// Seeds the compressor randomness.
    pub seed: u64,
    /// Seeds the initial iterate.
    pub init_seed: u64,
    /// Same starting point on every agent.
    pub shared_init: bool,
    pub reference_tol: f64,
    /// Record elapsed time. Traces are then no longer reproducible byte for byte.
    pub wall_clock: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: Mode::ConvexResidual,
            record_every: 10,
            seed: 4,
            init_seed: 3,
            shared_init: false,
            reference_tol: REFERENCE_TOLERANCE,
            wall_clock: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub svg: bool,
    /// Also write `<name>_edges.txt` and `<name>_mixing.csv`.
    pub graph_files: bool,
    /// Also write `<name>_dataset.bin`.
    pub dataset_file: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            svg: true,
            graph_files: false,
            dataset_file: false,
        }
    }
}

/// Constants for the bound calculator that cannot be read off the graph or
/// the step sizes. Each must be supplied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySection {
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub mu: Option<f64>,
    pub theta_r: Option<f64>,
    pub theta_c: Option<f64>,
    pub delta_r2: Option<f64>,
    pub delta_c2: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub delta: Option<f64>,
    pub sigma2: Option<f64>,
    pub sigma2_r: Option<f64>,
    /// Ratio `λ̄ / λ̂`. Derived from the configured step sizes when absent.
    #[serde(rename = "M")]
    pub m: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.into(),
            message: e.to_string(),
        })?;
        config.validate().map_err(|e| Error::Config {
            path: origin.into(),
            message: e,
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// TOML rendering of everything that determines the trace.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn params(&self) -> RcppParams {
        let a = &self.algorithm;
        RcppParams {
            alpha_x: a.alpha_x,
            alpha_y: a.alpha_y,
            gamma_x: a.gamma_x,
            gamma_y: a.gamma_y,
            lambda: a.lambda.resolve(self.problem.n),
            schedule: Schedule { a0: a.a0, a: a.a },
            x_compressor: self.compressor.x.clone(),
            y_compressor: self.compressor.y.clone(),
            iterations: a.iterations,
            r: a.r,
            allow_constant_scaling: a.constant_scaling,
            bit_mode: a.bit_mode,
        }
    }

    /// Cross-field checks that serde cannot express.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let p = &self.problem;
        if p.n == 0 || p.p == 0 || p.j == 0 {
            return Err("problem.n, problem.p and problem.j must be positive".into());
        }
        if !(p.sigma > 0.0 && p.sigma.is_finite()) {
            return Err(format!("problem.sigma = {} must be positive", p.sigma));
        }
        if !(p.rho >= 0.0 && p.rho.is_finite()) {
            return Err(format!("problem.rho = {} must be non-negative", p.rho));
        }
        if self.run.mode == Mode::ConvexResidual
            && !(p.regularizer == Regularizer::Convex && p.rho > 0.0)
        {
            return Err(
                "run.mode = \"convex-residual\" needs regularizer = \"convex\" and rho > 0; \
                 use \"nonconvex-gradnorm\" otherwise"
                    .into(),
            );
        }
        if !(0.0..=1.0).contains(&self.graph.extra_edge_prob) {
            return Err(format!(
                "graph.extra_edge_prob = {} outside [0, 1]",
                self.graph.extra_edge_prob
            ));
        }
        if let StepSizes::PerAgent(v) = &self.algorithm.lambda {
            if v.len() != p.n {
                return Err(format!(
                    "algorithm.lambda lists {} step sizes for {} agents",
                    v.len(),
                    p.n
                ));
            }
        }
        if self.algorithm.a == 1.0 && !self.algorithm.constant_scaling {
            return Err(
                "algorithm.a = 1 disables the decaying scaling; set constant_scaling = true for the ablation"
                    .into(),
            );
        }
        if self.run.record_every == 0 {
            return Err("run.record_every must be positive".into());
        }
        if !(self.run.reference_tol > 0.0) {
            return Err("run.reference_tol must be positive".into());
        }
        self.params().validate(p.n).map_err(|e| e.to_string())?;
        Ok(())
    }
}

/// Reads the config block from the `#` header of a trace CSV.
pub fn config_from_csv_header(csv: &str) -> Result<ExperimentConfig> {
    let mut text = String::new();
    for line in csv.lines() {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        text.push_str(rest.strip_prefix(' ').unwrap_or(rest));
        text.push('\n');
    }
    ExperimentConfig::parse(&text, "trace header")
}
