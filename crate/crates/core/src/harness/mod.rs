//! Experiment configs, trace output, ablation suites and reports.

mod config;
mod experiment;
mod output;
mod suite;
pub mod svg;
mod theory_report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{
    config_from_csv_header, AlgorithmSection, CompressorSection, ExperimentConfig, GraphSection,
    Mode, OutputSection, ProblemSection, RunSection, StepSizes, TheorySection,
};
pub use experiment::{
    build_instance, metric_name, primary_metric, run_experiment, run_on_instance,
    write_experiment, ExperimentResult, Instance,
};
pub use output::{trace_csv, write_atomic, CSV_COLUMNS};
pub use suite::{run_suite, write_suite, SuiteConfig, SuiteMember, SuiteResult, SuiteRun};
pub use theory_report::{theory_report, TheoryReport};

use crate::compression::{estimate_constants, CompressionConstants, CompressorSpec};
use crate::error::Result;

/// Settings for `estimate-compressor`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    pub spec: CompressorSpec,
    pub dim: usize,
    pub r: f64,
    pub samples: usize,
    /// Standard deviation of the Gaussian test inputs.
    pub scale: f64,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            spec: CompressorSpec::qn(),
            dim: 50,
            r: 1.0,
            samples: 2000,
            scale: 1.0,
            seed: 0,
        }
    }
}

pub fn estimate_compressor(config: &EstimateConfig) -> Result<CompressionConstants> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    estimate_constants(
        &config.spec,
        config.dim,
        config.r,
        config.samples,
        config.scale,
        &mut rng,
    )
}

pub fn format_constants(spec: &CompressorSpec, c: &CompressionConstants) -> String {
    format!(
        "compressor {spec} (dim {}, {} samples)\n\
         C_hat      = {:e} ± {:e}\n\
         sigma2_hat = {:e} ± {:e}\n\
         delta_hat  = {:e} ± {:e}  (r = {})\n\
         sigma2_r   = {:e}\n",
        c.dim,
        c.sample_count,
        c.c_hat,
        c.c_hat_stderr,
        c.sigma2_hat,
        c.sigma2_stderr,
        c.delta_hat,
        c.delta_stderr,
        c.r,
        c.sigma2_r_hat
    )
}
