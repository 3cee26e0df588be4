use std::path::PathBuf;

use super::config::{ExperimentConfig, Mode, OutputSection};
use super::output::{trace_csv, write_atomic};
use super::svg::{self, Series};
use crate::algorithm::{run, RunOptions, Trace};
use crate::error::{domain, Result};
use crate::graph::{build_mixing_pair, check_mixing_assumption, generate_digraph, Digraph, MixingPair};
use crate::metrics::MetricsRecord;
use crate::problems::{generate_problem, initial_point, solve_reference, LogisticProblem, ReferenceSolution};

/// Acceptance tolerance for the mixing-pair sanity check at load.
const ASSUMPTION_TOLERANCE: f64 = 1e-8;

/// Problem data, graph and reference solution shared by runs that differ only
/// in algorithm settings.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: LogisticProblem,
    pub graph: Digraph,
    pub pair: MixingPair,
    pub reference: Option<ReferenceSolution>,
}

pub fn build_instance(config: &ExperimentConfig) -> Result<Instance> {
    let problem = generate_problem(config.problem.params())?;
    let graph = match &config.graph.edge_list {
        Some(path) => Digraph::read_edge_list(path)?,
        None => generate_digraph(
            config.problem.n,
            config.graph.extra_edge_prob,
            config.graph.seed,
        )?,
    };
    if graph.n() != config.problem.n {
        return Err(domain(format!(
            "graph has {} nodes but problem.n = {}",
            graph.n(),
            config.problem.n
        )));
    }
    let pair = build_mixing_pair(&graph)?;
    let report = check_mixing_assumption(&pair);
    if !report.holds(ASSUMPTION_TOLERANCE) {
        return Err(domain(format!(
            "mixing pair violates the root-intersection assumption: {report:?}"
        )));
    }
    let reference = match config.run.mode {
        Mode::ConvexResidual => Some(solve_reference(&problem, config.run.reference_tol)?),
        Mode::NonconvexGradnorm => None,
    };
    Ok(Instance {
        problem,
        graph,
        pair,
        reference,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub trace: Trace,
    pub csv: String,
}

impl ExperimentResult {
    pub fn records(&self) -> &[MetricsRecord] {
        &self.trace.records
    }

    pub fn series(&self, label: &str) -> Series {
        let mode = self.config.run.mode;
        Series {
            label: label.into(),
            points: self
                .records()
                .iter()
                .map(|r| (r.k as f64, r.cumulative_bits as f64, primary_metric(mode, r)))
                .collect(),
        }
    }

    pub fn svg(&self) -> String {
        svg::render(
            &self.config.name,
            metric_name(self.config.run.mode),
            &[self.series(&self.config.name)],
        )
    }
}

/// The quantity a mode reports: residual for convex runs, gradient norm otherwise.
pub fn primary_metric(mode: Mode, r: &MetricsRecord) -> f64 {
    match mode {
        Mode::ConvexResidual => r.residual.unwrap_or(f64::NAN),
        Mode::NonconvexGradnorm => r.grad_norm,
    }
}

pub fn metric_name(mode: Mode) -> &'static str {
    match mode {
        Mode::ConvexResidual => "residual f(x̄) − f*",
        Mode::NonconvexGradnorm => "‖∇f(x̄)‖",
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let instance = build_instance(config)?;
    run_on_instance(config, &instance)
}

/// Runs `config` on a prebuilt instance, which must match its problem and graph sections.
pub fn run_on_instance(config: &ExperimentConfig, instance: &Instance) -> Result<ExperimentResult> {
    let n = config.problem.n;
    let x0 = initial_point(n, config.problem.p, config.run.init_seed, config.run.shared_init);
    let options = RunOptions {
        record_every: config.run.record_every,
        reference: instance.reference.clone(),
        wall_clock: config.run.wall_clock,
    };
    let trace = run(
        &instance.problem,
        &instance.pair,
        &config.params(),
        x0,
        config.run.seed,
        &options,
    )?;
    let csv = trace_csv(&config.to_toml(), &trace.records);
    Ok(ExperimentResult {
        config: config.clone(),
        trace,
        csv,
    })
}

/// Writes `<name>.csv`, optionally `<name>.svg` and the graph and dataset
/// files, returning the paths written.
pub fn write_experiment(
    result: &ExperimentResult,
    instance: &Instance,
    output: &OutputSection,
) -> Result<Vec<PathBuf>> {
    let name = &result.config.name;
    let mut written = Vec::new();
    let csv_path = output.dir.join(format!("{name}.csv"));
    write_atomic(&csv_path, result.csv.as_bytes())?;
    written.push(csv_path);
    if output.svg {
        let path = output.dir.join(format!("{name}.svg"));
        write_atomic(&path, result.svg().as_bytes())?;
        written.push(path);
    }
    written.extend(write_instance_files(name, instance, output)?);
    Ok(written)
}

pub(crate) fn write_instance_files(
    name: &str,
    instance: &Instance,
    output: &OutputSection,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if output.graph_files {
        let edges = output.dir.join(format!("{name}_edges.txt"));
        write_atomic(&edges, instance.graph.to_edge_list().as_bytes())?;
        let mixing = output.dir.join(format!("{name}_mixing.csv"));
        write_atomic(&mixing, instance.pair.to_csv().as_bytes())?;
        written.extend([edges, mixing]);
    }
    if output.dataset_file {
        std::fs::create_dir_all(&output.dir)?;
        let path = output.dir.join(format!("{name}_dataset.bin"));
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        instance.problem.write_binary(&tmp)?;
        std::fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}
