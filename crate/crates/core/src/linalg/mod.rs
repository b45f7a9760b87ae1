//! Dense kernels shared by the model code: streaming normal-equation
//! accumulation, the regularized Cholesky solve, and normal quantiles.

mod gram;
mod normal;
mod spd;

pub use gram::GramState;
pub use normal::{normal_cdf, normal_ppf, std_normal_quantile};
pub use spd::{spd_solve, SpdFactor};

use ndarray::{Array2, ArrayView2};

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: ArrayView2<f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    let n = out.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}
