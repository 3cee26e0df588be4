//! The compressed push-pull iteration, its scaling schedule, checkpoints,
//! and the theoretical parameter-bound calculator.

mod checkpoint;
mod params;
mod run;
mod state;
mod theory;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use params::{BitMode, RcppParams, Schedule};
pub use run::{run, run_from, snapshot, RunOptions, Trace};
pub use state::{agent_rng, AgentRng, RcppState, StepStats};
pub use theory::{theory_bounds, TheoryBounds, TheoryInputs};
