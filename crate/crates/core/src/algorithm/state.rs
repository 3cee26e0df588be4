use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::params::{BitMode, RcppParams};
use crate::compression::{dynamic_scale_compress, CompressorSpec};
use crate::error::{Error, Result};
use crate::graph::MixingPair;
use crate::linalg::Matrix;
use crate::problems::{stacked_gradient, Objective};

/// Compression randomness of one agent on one chain.
pub type AgentRng = ChaCha8Rng;

/// Everything the synchronous iteration carries from round to round.
#[derive(Debug, Clone, PartialEq)]
pub struct RcppState {
    pub k: u64,
    pub x: Matrix,
    pub y: Matrix,
    pub h_x: Matrix,
    pub h_y: Matrix,
    /// Aggregate `R·H_x`, maintained from received messages only.
    pub h_r: Matrix,
    /// Aggregate `C·H_y`, maintained from received messages only.
    pub h_c: Matrix,
    /// `∇F(X)` for the current `x`.
    pub grad: Matrix,
    pub cumulative_bits: u64,
    pub rng_x: Vec<AgentRng>,
    pub rng_y: Vec<AgentRng>,
}

/// Per-round accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    /// Iteration index the round ran at.
    pub k: u64,
    pub s_k: f64,
    /// Bits of each agent's x-message.
    pub x_message_bits: Vec<u64>,
    pub y_message_bits: Vec<u64>,
    /// Bits placed on the network this round, per the configured [`BitMode`].
    pub x_bits: u64,
    pub y_bits: u64,
    /// `‖Q_x − (X̃ − H_x)‖_F²`
    pub x_compression_error: f64,
    /// `‖Q_y − (Ỹ − H_y)‖_F²`
    pub y_compression_error: f64,
}

impl StepStats {
    pub fn round_bits(&self) -> u64 {
        self.x_bits + self.y_bits
    }
}

/// Independent stream for `(agent, chain)` drawn from the run seed.
pub fn agent_rng(seed: u64, agent: usize, chain: u64) -> AgentRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((agent as u64) << 1) | chain);
    rng
}

impl RcppState {
    /// `Y⁰ = ∇F(X⁰)`, all compression references zero.
    pub fn new<O: Objective + ?Sized>(problem: &O, x0: Matrix, seed: u64) -> Result<Self> {
        let (n, p) = (problem.agents(), problem.dim());
        if x0.shape() != (n, p) {
            return Err(Error::Dimension {
                expected: format!("initial iterate {n}x{p}"),
                got: format!("{:?}", x0.shape()),
            });
        }
        let grad = stacked_gradient(problem, &x0)?;
        Ok(Self {
            k: 0,
            y: grad.clone(),
            grad,
            x: x0,
            h_x: Matrix::zeros(n, p),
            h_y: Matrix::zeros(n, p),
            h_r: Matrix::zeros(n, p),
            h_c: Matrix::zeros(n, p),
            cumulative_bits: 0,
            rng_x: (0..n).map(|i| agent_rng(seed, i, 0)).collect(),
            rng_y: (0..n).map(|i| agent_rng(seed, i, 1)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    /// One synchronous round: local update, difference compression with
    /// dynamic scaling, aggregate update, and damped mixing, first for the
    /// decision variables and then for the gradient trackers.
    pub fn step<O: Objective + ?Sized>(
        &mut self,
        params: &RcppParams,
        pair: &MixingPair,
        problem: &O,
    ) -> Result<StepStats> {
        let k = self.k;
        let s_k = params.schedule.scaling(k);

        // x-chain
        let mut x_tilde = self.x.clone();
        for (i, row) in x_tilde.rows_mut().enumerate() {
            let lambda = params.lambda[i];
            for (v, y) in row.iter_mut().zip(self.y.row(i)) {
                *v -= lambda * y;
            }
        }
        self.ensure_finite(&x_tilde, "X - ΛY", s_k)?;
        let x_round = compress_round(
            &params.x_compressor,
            &x_tilde,
            &self.h_x,
            s_k,
            &mut self.rng_x,
        )?;
        let x_hat = self.h_x.add(&x_round.q);
        let x_hat_r = self.h_r.add(&pair.r.matmul(&x_round.q)?);
        relax(&mut self.h_x, &x_hat, params.alpha_x);
        relax(&mut self.h_r, &x_hat_r, params.alpha_x);
        let mut x_next = x_tilde;
        x_next.axpy(-params.gamma_x, &x_hat.sub(&x_hat_r));
        self.ensure_finite(&x_next, "X", s_k)?;

        // y-chain
        let grad_next = stacked_gradient(problem, &x_next)?;
        // (Y − ∇F(X)) first: it is exactly zero whenever Y already equals the
        // gradient, so a lone agent reproduces gradient descent bit for bit
        let y_tilde = self.y.sub(&self.grad).add(&grad_next);
        self.ensure_finite(&y_tilde, "Y + ∇F(X⁺) - ∇F(X)", s_k)?;
        let y_round = compress_round(
            &params.y_compressor,
            &y_tilde,
            &self.h_y,
            s_k,
            &mut self.rng_y,
        )?;
        let y_hat = self.h_y.add(&y_round.q);
        let y_hat_c = self.h_c.add(&pair.c.matmul(&y_round.q)?);
        relax(&mut self.h_y, &y_hat, params.alpha_y);
        relax(&mut self.h_c, &y_hat_c, params.alpha_y);
        let mut y_next = y_tilde;
        y_next.axpy(-params.gamma_y, &y_hat.sub(&y_hat_c));
        self.ensure_finite(&y_next, "Y", s_k)?;

        let x_bits = network_bits(&x_round.bits, params.bit_mode, |i| pair.r_out_degree(i));
        let y_bits = network_bits(&y_round.bits, params.bit_mode, |i| pair.c_out_degree(i));

        self.x = x_next;
        self.y = y_next;
        self.grad = grad_next;
        self.k += 1;
        self.cumulative_bits += x_bits + y_bits;

        Ok(StepStats {
            k,
            s_k,
            x_message_bits: x_round.bits,
            y_message_bits: y_round.bits,
            x_bits,
            y_bits,
            x_compression_error: x_round.error,
            y_compression_error: y_round.error,
        })
    }

    fn ensure_finite(&self, m: &Matrix, what: &str, s_k: f64) -> Result<()> {
        if m.is_finite() {
            return Ok(());
        }
        Err(Error::Divergence {
            k: self.k,
            dump: format!(
                "{what} became non-finite (s_k = {s_k:e}, ‖X‖_F = {:e}, ‖Y‖_F = {:e}, ‖H_x‖_F = {:e}, ‖H_y‖_F = {:e}, bits so far {})",
                self.x.frobenius(),
                self.y.frobenius(),
                self.h_x.frobenius(),
                self.h_y.frobenius(),
                self.cumulative_bits
            ),
        })
    }
}

struct CompressedRound {
    /// Recovered `s_k · C((target − reference) / s_k)`, one row per agent.
    q: Matrix,
    bits: Vec<u64>,
    error: f64,
}

fn compress_round(
    spec: &CompressorSpec,
    target: &Matrix,
    reference: &Matrix,
    s_k: f64,
    rngs: &mut [AgentRng],
) -> Result<CompressedRound> {
    let diff = target.sub(reference);
    let per_agent: Vec<(Vec<f64>, u64)> = rngs
        .par_iter_mut()
        .enumerate()
        .map(|(i, rng)| {
            let (msg, recovered) = dynamic_scale_compress(spec, diff.row(i), s_k, rng)?;
            Ok((recovered, msg.bit_count))
        })
        .collect::<Result<_>>()?;
    let (rows, bits): (Vec<Vec<f64>>, Vec<u64>) = per_agent.into_iter().unzip();
    let q = Matrix::from_rows(&rows)?;
    let error = q.sub(&diff).frobenius_sq();
    Ok(CompressedRound { q, bits, error })
}

/// `h ← (1 − α) h + α target`
fn relax(h: &mut Matrix, target: &Matrix, alpha: f64) {
    for (a, b) in h.as_mut_slice().iter_mut().zip(target.as_slice()) {
        *a = (1.0 - alpha) * *a + alpha * b;
    }
}

fn network_bits(bits: &[u64], mode: BitMode, out_degree: impl Fn(usize) -> usize) -> u64 {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| {
            let receivers = out_degree(i) as u64;
            match mode {
                BitMode::PerEdge => b * receivers,
                BitMode::Broadcast => b * u64::from(receivers > 0),
            }
        })
        .sum()
}
