//! Encoders and decoders for every [`CompressorSpec`].
//!
//! Payload layouts (all fields MSB-first):
//!
//! * `Identity`: `dim` raw IEEE-754 binary64 values.
//! * `InfNormQuant{b}`: a single `0` bit when `‖x‖∞ = 0`; otherwise an 8-bit
//!   norm-field width `w`, the norm field (`φ(‖x‖∞)` as a `w`-bit unsigned
//!   integer with `w = ⌊log₂(φ+1)⌋+1`, or a binary32 value when the norm is
//!   sent raw), then per coordinate one sign bit and a `b`-bit magnitude level.
//! * `TopK{k}`: `min(k, dim)` pairs of `⌈log₂ dim⌉`-bit index and binary64
//!   value, indices ascending.
//! * `FixedLevelQuant`: per coordinate a two's-complement level code of
//!   `⌈log₂(2c+2)⌉` bits for clamp level `c`; when unbounded, an 8-bit code
//!   width precedes the codes.
//! * `Compose{outer, inner}`: when `inner` is a Top-k sparsifier, its index
//!   fields followed by `outer`'s payload over the kept values; otherwise
//!   `outer`'s payload over the decoded output of `inner`.

use rand::Rng;

use super::bits::{index_width, BitReader, BitWriter};
use super::spec::{ClampLevel, CompressorSpec};
use crate::error::{domain, Error, Result};
use crate::linalg::norm_inf;

/// Largest quantization level magnitude accepted by the fixed-level quantizer.
const MAX_LEVEL: f64 = 4_611_686_018_427_387_904.0; // 2^62

/// Largest norm the stochastic norm rounding will encode exactly.
const MAX_INTEGER_NORM: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedMessage {
    pub dim: usize,
    pub payload: Vec<u8>,
    pub bit_count: u64,
    pub spec: CompressorSpec,
}

impl CompressedMessage {
    /// True for the one-bit message that stands for the zero vector.
    pub fn is_zero_flag(&self) -> bool {
        self.bit_count == 1
    }
}

pub fn compress<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    x: &[f64],
    rng: &mut R,
) -> Result<CompressedMessage> {
    if x.is_empty() {
        return Err(domain("cannot compress an empty vector"));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(domain(format!("non-finite input at coordinate {i}: {}", x[i])));
    }
    spec.validate()?;
    let mut w = BitWriter::new();
    encode(spec, x, rng, &mut w)?;
    let (payload, bit_count) = w.into_parts();
    Ok(CompressedMessage {
        dim: x.len(),
        payload,
        bit_count,
        spec: spec.clone(),
    })
}

pub fn decode(msg: &CompressedMessage) -> Result<Vec<f64>> {
    if (msg.payload.len() as u64) * 8 < msg.bit_count || msg.bit_count + 8 <= msg.payload.len() as u64 * 8 {
        return Err(Error::Decode(format!(
            "{} payload bytes cannot hold {} bits",
            msg.payload.len(),
            msg.bit_count
        )));
    }
    let mut r = BitReader::new(&msg.payload, msg.bit_count);
    let out = decode_tail(&msg.spec, &mut r, msg.dim)?;
    if r.remaining() != 0 {
        return Err(Error::Decode(format!("{} trailing bits", r.remaining())));
    }
    Ok(out)
}

/// Message carrying `C(x / s)` and the receiver-side recovery `s · C(x / s)`.
pub fn dynamic_scale_compress<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    x: &[f64],
    s: f64,
    rng: &mut R,
) -> Result<(CompressedMessage, Vec<f64>)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("scaling factor s_k = {s} must be positive and finite")));
    }
    let scaled: Vec<f64> = x.iter().map(|v| v / s).collect();
    let msg = compress(spec, &scaled, rng)?;
    let recovered = decode(&msg)?.into_iter().map(|v| s * v).collect();
    Ok((msg, recovered))
}

/// Indices of the `k` largest magnitudes, ties to the lower index, ascending.
pub fn top_k_indices(x: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    order.truncate(k.min(x.len()));
    order.sort_unstable();
    order
}

fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        u64::BITS - (v - 1).leading_zeros()
    }
}

fn level_width(clamp: u64) -> u32 {
    ceil_log2(2 * clamp + 2)
}

fn encode<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    x: &[f64],
    rng: &mut R,
    w: &mut BitWriter,
) -> Result<()> {
    match spec {
        CompressorSpec::Identity => {
            for v in x {
                w.push_bits(v.to_bits(), 64);
            }
        }
        CompressorSpec::InfNormQuant { b, stochastic_norm } => {
            encode_inf_norm(*b, *stochastic_norm, x, rng, w)?;
        }
        CompressorSpec::TopK { k } => {
            let iw = index_width(x.len());
            for i in top_k_indices(x, *k) {
                w.push_bits(i as u64, iw);
                w.push_bits(x[i].to_bits(), 64);
            }
        }
        CompressorSpec::FixedLevelQuant { step, clamp_level } => {
            let mut levels = Vec::with_capacity(x.len());
            for v in x {
                let raw = (v / step).round();
                if raw.abs() >= MAX_LEVEL {
                    return Err(domain(format!(
                        "fixed-level quantizer input {v} is too large for step {step}"
                    )));
                }
                let level = raw as i64;
                levels.push(match clamp_level {
                    ClampLevel::Finite(c) => level.clamp(-i64::from(*c), i64::from(*c)),
                    ClampLevel::Unbounded => level,
                });
            }
            let width = match clamp_level {
                ClampLevel::Finite(c) => level_width(u64::from(*c)),
                ClampLevel::Unbounded => {
                    let m = levels.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0);
                    let width = level_width(m);
                    w.push_bits(u64::from(width), 8);
                    width
                }
            };
            let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            for l in levels {
                w.push_bits((l as u64) & mask, width);
            }
        }
        CompressorSpec::Compose { outer, inner } => {
            let mut inner_writer = BitWriter::new();
            encode(inner, x, rng, &mut inner_writer)?;
            let (bytes, len) = inner_writer.into_parts();
            let mut reader = BitReader::new(&bytes, len);
            let y = decode_tail(inner, &mut reader, x.len())?;
            if let CompressorSpec::TopK { k } = inner.as_ref() {
                let support = top_k_indices(x, *k);
                let iw = index_width(x.len());
                for &i in &support {
                    w.push_bits(i as u64, iw);
                }
                let kept: Vec<f64> = support.iter().map(|&i| y[i]).collect();
                encode(outer, &kept, rng, w)?;
            } else {
                encode(outer, &y, rng, w)?;
            }
        }
    }
    Ok(())
}

fn encode_inf_norm<R: Rng + ?Sized>(
    b: u32,
    stochastic_norm: bool,
    x: &[f64],
    rng: &mut R,
    w: &mut BitWriter,
) -> Result<()> {
    let norm = norm_inf(x);
    if norm == 0.0 {
        w.push_bit(false);
        return Ok(());
    }
    if stochastic_norm {
        if norm >= MAX_INTEGER_NORM {
            return Err(domain(format!("norm {norm} too large for integer rounding")));
        }
        let floor = norm.floor();
        let frac = norm - floor;
        let u: f64 = rng.gen();
        let phi = floor as u64 + u64::from(u < frac);
        let width = u64::BITS - (phi + 1).leading_zeros();
        w.push_bits(u64::from(width), 8);
        w.push_bits(phi, width);
    } else {
        w.push_bits(32, 8);
        w.push_bits(u64::from((norm as f32).to_bits()), 32);
    }
    let top = (1u64 << (b - 1)) as f64;
    for v in x {
        let u: f64 = rng.gen();
        let level = (top * v.abs() / norm + u).floor().min(top) as u64;
        w.push_bit(*v < 0.0);
        w.push_bits(level, b);
    }
    Ok(())
}

fn decode_tail(spec: &CompressorSpec, r: &mut BitReader<'_>, dim: usize) -> Result<Vec<f64>> {
    match spec {
        CompressorSpec::Identity => (0..dim).map(|_| Ok(f64::from_bits(r.read_bits(64)?))).collect(),
        CompressorSpec::InfNormQuant { b, stochastic_norm } => {
            if r.remaining() == 1 {
                if r.read_bit()? {
                    return Err(Error::Decode("one-bit message must be the zero flag".into()));
                }
                return Ok(vec![0.0; dim]);
            }
            let width = r.read_bits(8)? as u32;
            let scale = if *stochastic_norm {
                if width == 0 || width > 54 {
                    return Err(Error::Decode(format!("norm field width {width}")));
                }
                r.read_bits(width)? as f64
            } else {
                if width != 32 {
                    return Err(Error::Decode(format!("raw norm needs 32 bits, header says {width}")));
                }
                f64::from(f32::from_bits(r.read_bits(32)? as u32))
            };
            let expected = dim as u64 * u64::from(b + 1);
            if r.remaining() != expected {
                return Err(Error::Decode(format!(
                    "expected {expected} coordinate bits, found {}",
                    r.remaining()
                )));
            }
            let top = (1u64 << (b - 1)) as f64;
            (0..dim)
                .map(|_| {
                    let negative = r.read_bit()?;
                    let level = r.read_bits(*b)? as f64;
                    if level > top {
                        return Err(Error::Decode(format!("level {level} above {top}")));
                    }
                    let v = scale / top * level;
                    Ok(if negative { -v } else { v })
                })
                .collect()
        }
        CompressorSpec::TopK { k } => {
            let iw = index_width(dim);
            let mut out = vec![0.0; dim];
            let mut last: Option<usize> = None;
            for _ in 0..(*k).min(dim) {
                let i = r.read_bits(iw)? as usize;
                if i >= dim || last.is_some_and(|l| i <= l) {
                    return Err(Error::Decode(format!("bad top-k index {i}")));
                }
                last = Some(i);
                out[i] = f64::from_bits(r.read_bits(64)?);
            }
            Ok(out)
        }
        CompressorSpec::FixedLevelQuant { step, clamp_level } => {
            let width = match clamp_level {
                ClampLevel::Finite(c) => level_width(u64::from(*c)),
                ClampLevel::Unbounded => {
                    let width = r.read_bits(8)? as u32;
                    if width == 0 || width > 64 {
                        return Err(Error::Decode(format!("level width {width}")));
                    }
                    width
                }
            };
            (0..dim)
                .map(|_| {
                    let code = r.read_bits(width)?;
                    let shift = 64 - width;
                    let level = ((code << shift) as i64) >> shift;
                    if let ClampLevel::Finite(c) = clamp_level {
                        if level.unsigned_abs() > u64::from(*c) {
                            return Err(Error::Decode(format!("level {level} beyond clamp {c}")));
                        }
                    }
                    Ok(step * level as f64)
                })
                .collect()
        }
        CompressorSpec::Compose { outer, inner } => {
            if let CompressorSpec::TopK { k } = inner.as_ref() {
                let iw = index_width(dim);
                let kept = (*k).min(dim);
                let mut support = Vec::with_capacity(kept);
                for _ in 0..kept {
                    let i = r.read_bits(iw)? as usize;
                    if i >= dim || support.last().is_some_and(|&l| i <= l) {
                        return Err(Error::Decode(format!("bad support index {i}")));
                    }
                    support.push(i);
                }
                let values = decode_tail(outer, r, kept)?;
                let mut out = vec![0.0; dim];
                for (i, v) in support.into_iter().zip(values) {
                    out[i] = v;
                }
                Ok(out)
            } else {
                decode_tail(outer, r, dim)
            }
        }
    }
}
