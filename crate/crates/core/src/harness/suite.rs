use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, OutputSection};
use super::experiment::{
    build_instance, metric_name, primary_metric, run_on_instance, write_instance_files,
    ExperimentResult,
};
use super::output::write_atomic;
use super::svg;
use crate::error::{Error, Result};

/// A base experiment plus `[[runs]]` tables that override parts of it.
///
/// ```toml
/// name = "ablation"
/// seeds = [4, 5, 6]
///
/// [compressor]
/// x = "levels"
/// y = "levels"
///
/// [[runs]]
/// label = "decaying"
///
/// [[runs]]
/// label = "constant"
/// algorithm.a = 1.0
/// algorithm.constant_scaling = true
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub name: String,
    /// Compressor seeds; each run is repeated once per seed.
    pub seeds: Vec<u64>,
    pub runs: Vec<SuiteRun>,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub label: String,
    pub config: ExperimentConfig,
}

impl SuiteConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |message: String| Error::Config {
            path: origin.into(),
            message,
        };
        let mut base: toml::Table = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        let name = match base.remove("name") {
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err(err("`name` must be a string".into())),
            None => "suite".into(),
        };
        let runs = match base.remove("runs") {
            Some(toml::Value::Array(a)) => a,
            Some(_) => return Err(err("`runs` must be an array of tables ([[runs]])".into())),
            None => return Err(err("suite needs at least one [[runs]] table".into())),
        };
        let seeds = match base.remove("seeds") {
            Some(v) => {
                let list: Vec<u64> = v
                    .try_into()
                    .map_err(|e: toml::de::Error| err(format!("seeds: {e}")))?;
                if list.is_empty() {
                    return Err(err("`seeds` must not be empty".into()));
                }
                Some(list)
            }
            None => None,
        };
        let output: OutputSection = match base.remove("output") {
            Some(v) => v
                .try_into()
                .map_err(|e: toml::de::Error| err(format!("output: {e}")))?,
            None => OutputSection::default(),
        };

        let mut members = Vec::with_capacity(runs.len());
        for (i, run) in runs.into_iter().enumerate() {
            let toml::Value::Table(mut overrides) = run else {
                return Err(err(format!("runs[{i}] is not a table")));
            };
            let label = match overrides.remove("label") {
                Some(toml::Value::String(s)) => s,
                _ => return Err(err(format!("runs[{i}] needs a string `label`"))),
            };
            if overrides.contains_key("output") || overrides.contains_key("name") {
                return Err(err(format!(
                    "run `{label}`: `output` and `name` are set for the whole suite"
                )));
            }
            let mut merged = base.clone();
            merge(&mut merged, overrides);
            merged.insert("name".into(), toml::Value::String(format!("{name}_{label}")));
            let config: ExperimentConfig = toml::Value::Table(merged)
                .try_into()
                .map_err(|e: toml::de::Error| err(format!("run `{label}`: {e}")))?;
            config
                .validate()
                .map_err(|e| err(format!("run `{label}`: {e}")))?;
            members.push(SuiteRun { label, config });
        }
        if let Some(first) = members.first() {
            for m in &members[1..] {
                let (a, b) = (&first.config, &m.config);
                if a.problem != b.problem
                    || a.graph != b.graph
                    || a.run.mode != b.run.mode
                    || a.run.reference_tol != b.run.reference_tol
                {
                    return Err(err(format!(
                        "run `{}` changes the problem, graph or mode; suite runs must share them",
                        m.label
                    )));
                }
            }
        }
        let labels: std::collections::BTreeSet<_> = members.iter().map(|m| &m.label).collect();
        if labels.len() != members.len() {
            return Err(err("run labels must be unique".into()));
        }
        let seeds = seeds.unwrap_or_else(|| vec![members[0].config.run.seed]);
        Ok(Self {
            name,
            seeds,
            runs: members,
            output,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Member configs with the seed applied, in output order (run-major).
    pub fn members(&self) -> Vec<(String, u64, ExperimentConfig)> {
        let multi = self.seeds.len() > 1;
        let mut out = Vec::new();
        for run in &self.runs {
            for &seed in &self.seeds {
                let mut config = run.config.clone();
                config.run.seed = seed;
                if multi {
                    config.name = format!("{}_seed{seed}", config.name);
                }
                out.push((run.label.clone(), seed, config));
            }
        }
        out
    }
}

/// Recursive table merge; scalars and arrays in `over` replace those in `base`.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteMember {
    pub label: String,
    pub seed: u64,
    pub result: ExperimentResult,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: String,
    pub seeds: Vec<u64>,
    pub members: Vec<SuiteMember>,
    pub summary_csv: String,
    pub svg: String,
}

impl SuiteResult {
    pub fn member(&self, label: &str, seed: u64) -> Option<&SuiteMember> {
        self.members
            .iter()
            .find(|m| m.label == label && m.seed == seed)
    }
}

/// Runs every member in parallel on one shared instance.
pub fn run_suite(suite: &SuiteConfig) -> Result<SuiteResult> {
    let instance = build_instance(&suite.runs[0].config)?;
    let members: Vec<SuiteMember> = suite
        .members()
        .into_par_iter()
        .map(|(label, seed, config)| {
            run_on_instance(&config, &instance).map(|result| SuiteMember {
                label,
                seed,
                result,
            })
        })
        .collect::<Result<_>>()?;
    let mode = suite.runs[0].config.run.mode;
    let summary_csv = summary_csv(suite, &members);
    let series: Vec<_> = members
        .iter()
        .map(|m| {
            let label = if suite.seeds.len() > 1 {
                format!("{} (seed {})", m.label, m.seed)
            } else {
                m.label.clone()
            };
            m.result.series(&label)
        })
        .collect();
    let svg = svg::render(&suite.name, metric_name(mode), &series);
    Ok(SuiteResult {
        name: suite.name.clone(),
        seeds: suite.seeds.clone(),
        members,
        summary_csv,
        svg,
    })
}

/// One row per run: final metric and total bits for each seed, then their means.
fn summary_csv(suite: &SuiteConfig, members: &[SuiteMember]) -> String {
    let mode = suite.runs[0].config.run.mode;
    let mut out = String::new();
    let _ = writeln!(out, "# suite = {}", suite.name);
    let _ = writeln!(out, "# metric = {}", metric_name(mode));
    out.push_str("label");
    for s in &suite.seeds {
        let _ = write!(out, ",final_metric_seed{s},bits_seed{s}");
    }
    out.push_str(",final_metric_mean,bits_mean\n");
    for run in &suite.runs {
        out.push_str(&run.label);
        let mut metric_sum = 0.0;
        let mut bits_sum = 0.0;
        for &seed in &suite.seeds {
            let m = members
                .iter()
                .find(|m| m.label == run.label && m.seed == seed)
                .expect("every run/seed pair was executed");
            let last = m.result.trace.last();
            let metric = primary_metric(mode, last);
            metric_sum += metric;
            bits_sum += last.cumulative_bits as f64;
            let _ = write!(out, ",{metric:e},{}", last.cumulative_bits);
        }
        let count = suite.seeds.len() as f64;
        let _ = writeln!(out, ",{:e},{:e}", metric_sum / count, bits_sum / count);
    }
    out
}

/// Writes each member CSV, `<suite>_summary.csv` and optionally `<suite>.svg`.
pub fn write_suite(result: &SuiteResult, suite: &SuiteConfig) -> Result<Vec<PathBuf>> {
    let dir = &suite.output.dir;
    let mut written = Vec::new();
    for m in &result.members {
        let path = dir.join(format!("{}.csv", m.result.config.name));
        write_atomic(&path, m.result.csv.as_bytes())?;
        written.push(path);
    }
    let summary = dir.join(format!("{}_summary.csv", result.name));
    write_atomic(&summary, result.summary_csv.as_bytes())?;
    written.push(summary);
    if suite.output.svg {
        let path = dir.join(format!("{}.svg", result.name));
        write_atomic(&path, result.svg.as_bytes())?;
        written.push(path);
    }
    if suite.output.graph_files || suite.output.dataset_file {
        let instance = build_instance(&suite.runs[0].config)?;
        written.extend(write_instance_files(&result.name, &instance, &suite.output)?);
    }
    Ok(written)
}
