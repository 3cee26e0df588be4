//! Compression operators, dynamic scaling, exact bit accounting, and the
//! error-constant estimator.

pub mod bits;
mod codec;
mod estimate;
mod spec;

pub use codec::{compress, decode, dynamic_scale_compress, top_k_indices, CompressedMessage};
pub use estimate::{estimate_constants, CompressionConstants, MIN_SAMPLES};
pub use spec::{ClampLevel, CompressorSpec, MAX_COMPOSE_DEPTH};
