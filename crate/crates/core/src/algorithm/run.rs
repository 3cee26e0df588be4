use std::time::Instant;

use super::params::RcppParams;
use super::state::RcppState;
use crate::error::{domain, Result};
use crate::graph::MixingPair;
use crate::linalg::Matrix;
use crate::metrics::{self, MetricsRecord};
use crate::problems::{Objective, ReferenceSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub record_every: u64,
    /// Enables the residual column.
    pub reference: Option<ReferenceSolution>,
    /// Fill `wall_ms` from the real clock. Off keeps traces byte-reproducible.
    pub wall_clock: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            reference: None,
            wall_clock: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<MetricsRecord>,
    pub final_state: RcppState,
}

impl Trace {
    pub fn last(&self) -> &MetricsRecord {
        self.records.last().expect("trace always holds the starting record")
    }
}

pub fn snapshot<O: Objective + ?Sized>(
    state: &RcppState,
    params: &RcppParams,
    pair: &MixingPair,
    problem: &O,
    reference: Option<&ReferenceSolution>,
) -> Result<MetricsRecord> {
    metrics::record(
        state.k,
        &state.x,
        &state.y,
        &state.grad,
        problem,
        pair,
        reference,
        state.cumulative_bits,
        params.schedule.scaling(state.k),
    )
}

/// Initializes from `x0` and iterates `params.iterations` rounds.
pub fn run<O: Objective + ?Sized>(
    problem: &O,
    pair: &MixingPair,
    params: &RcppParams,
    x0: Matrix,
    seed: u64,
    options: &RunOptions,
) -> Result<Trace> {
    let state = RcppState::new(problem, x0, seed)?;
    run_from(state, problem, pair, params, options)
}

/// Continues `state` up to `params.iterations` rounds, recording every
/// `record_every` iterations and at the end.
pub fn run_from<O: Objective + ?Sized>(
    mut state: RcppState,
    problem: &O,
    pair: &MixingPair,
    params: &RcppParams,
    options: &RunOptions,
) -> Result<Trace> {
    params.validate(problem.agents())?;
    if pair.n() != problem.agents() {
        return Err(domain(format!(
            "mixing pair has {} agents, problem has {}",
            pair.n(),
            problem.agents()
        )));
    }
    if options.record_every == 0 {
        return Err(domain("record_every must be positive"));
    }
    let started = Instant::now();
    let reference = options.reference.as_ref();
    let stamp = |mut r: MetricsRecord| {
        if options.wall_clock {
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        }
        r
    };
    let mut records = Vec::new();
    if state.k % options.record_every == 0 || state.k == params.iterations {
        records.push(stamp(snapshot(&state, params, pair, problem, reference)?));
    }
    while state.k < params.iterations {
        state.step(params, pair, problem)?;
        if state.k % options.record_every == 0 || state.k == params.iterations {
            records.push(stamp(snapshot(&state, params, pair, problem, reference)?));
        }
    }
    Ok(Trace {
        records,
        final_state: state,
    })
}
