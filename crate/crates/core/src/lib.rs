//! Extreme Learning Machines with per-sample prediction intervals.
//!
//! A data model is trained on `(X, y)`, a second variance model is trained on
//! its squared training residuals, and the output-weight covariance of both is
//! estimated with a streaming weighted Jackknife. Intervals are
//!
//! ```text
//! ŷ ± z(α) · sqrt(max(r̂², 0) + σ²_r + σ²_y)
//! ```
//!
//! where `r̂²` is the variance model prediction and `σ²_r`, `σ²_y` are the
//! prediction variances of the two models.
//!
//! Modules:
//! - [`linalg`]: streaming Gram accumulation, Cholesky solve, normal quantile.
//! - [`elm`]: random hidden layer, ridge-trained output layer, γ validation.
//! - [`jackknife`]: weighted Jackknife weight covariance and Bienaymé variance.
//! - [`pipeline`]: the two-stage interval fit/predict procedure.
//! - [`eval`]: PICP/NMPIW, uniform-interval boundary, coverage filtering.
//! - [`data`]: CSV ingestion, synthetic generators, splits, persistence.

mod batch;
pub mod data;
pub mod elm;
mod error;
pub mod eval;
pub mod jackknife;
pub mod linalg;
pub mod pipeline;

pub use error::{Error, Result};

/// Rows per streamed batch when the caller does not choose one.
pub const DEFAULT_BATCH_ROWS: usize = 4096;

/// Derive an independent child seed from `base` and a stream id (splitmix64).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
