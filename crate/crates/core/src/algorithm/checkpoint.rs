//! Binary checkpoints of [`RcppState`].
//!
//! Layout, little-endian: 8-byte magic, `n`, `p`, `k`, `cumulative_bits`
//! (u64 each), the matrices `X, Y, H_x, H_y, H_R, H_C` as f64 row-major,
//! then for each agent its x-stream and y-stream state (32-byte seed,
//! u64 stream id, u128 word position). `∇F(X)` is recomputed on load.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::state::{AgentRng, RcppState};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problems::{stacked_gradient, Objective};

const MAGIC: &[u8; 8] = b"RCPPCKP1";

pub fn encode_checkpoint(state: &RcppState) -> Vec<u8> {
    let (n, p) = state.x.shape();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    for v in [n as u64, p as u64, state.k, state.cumulative_bits] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for m in [&state.x, &state.y, &state.h_x, &state.h_y, &state.h_r, &state.h_c] {
        for v in m.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for rng in state.rng_x.iter().chain(&state.rng_y) {
        buf.extend_from_slice(&rng.get_seed());
        buf.extend_from_slice(&rng.get_stream().to_le_bytes());
        buf.extend_from_slice(&rng.get_word_pos().to_le_bytes());
    }
    buf
}

pub fn decode_checkpoint<O: Objective + ?Sized>(bytes: &[u8], problem: &O) -> Result<RcppState> {
    let bad = |m: &str| Error::Format {
        path: "<checkpoint>".into(),
        message: m.to_string(),
    };
    if bytes.len() < 40 || &bytes[..8] != MAGIC {
        return Err(bad("missing checkpoint header"));
    }
    let mut cursor = Cursor { bytes, pos: 8 };
    let n = cursor.u64()? as usize;
    let p = cursor.u64()? as usize;
    let k = cursor.u64()?;
    let cumulative_bits = cursor.u64()?;
    if (n, p) != (problem.agents(), problem.dim()) {
        return Err(bad("checkpoint shape does not match the problem"));
    }
    let expected = 40 + 6 * n * p * 8 + 2 * n * (32 + 8 + 16);
    if bytes.len() != expected {
        return Err(bad("checkpoint length does not match its header"));
    }
    let mut matrix = || -> Result<Matrix> {
        let data = (0..n * p).map(|_| cursor.f64()).collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(n, p, data)
    };
    let x = matrix()?;
    let y = matrix()?;
    let h_x = matrix()?;
    let h_y = matrix()?;
    let h_r = matrix()?;
    let h_c = matrix()?;
    let mut rngs: Vec<AgentRng> = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        let seed: [u8; 32] = cursor.take(32)?.try_into().unwrap();
        let stream = cursor.u64()?;
        let word_pos = u128::from_le_bytes(cursor.take(16)?.try_into().unwrap());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        rngs.push(rng);
    }
    let rng_y = rngs.split_off(n);
    let grad = stacked_gradient(problem, &x)?;
    Ok(RcppState {
        k,
        x,
        y,
        h_x,
        h_y,
        h_r,
        h_c,
        grad,
        cumulative_bits,
        rng_x: rngs,
        rng_y,
    })
}

pub fn save_checkpoint(state: &RcppState, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(state))?;
    Ok(())
}

pub fn load_checkpoint<O: Objective + ?Sized>(path: &Path, problem: &O) -> Result<RcppState> {
    decode_checkpoint(&std::fs::read(path)?, problem).map_err(|e| match e {
        Error::Format { message, .. } => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| Error::Format {
            path: "<checkpoint>".into(),
            message: "truncated".into(),
        })?;
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
