//! Weighted Jackknife covariance of ELM output weights.
//!
//! With `P = (HᵀH + γI)⁻¹` from training, each batch `Hʲ` contributes
//!
//! ```text
//! Sʲ = Hʲ·P
//! ℓᵢ = Sᵢ·Hᵢ                       (leverage)
//! H'ᵢ = rᵢ² / (1 − ℓᵢ) · Hᵢ
//! A += (H'ʲ)ᵀ·Sʲ
//! ```
//!
//! and the covariance is `Σ = sym(P·A)`. Only `L × L` state is kept between
//! batches, so the row count is bounded by the stream, not by memory.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::batch;
use crate::linalg::symmetrize;
use crate::{Error, Result};

/// Floor for the leverage denominator `1 − ℓᵢ`.
pub const LEVERAGE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightCovariance {
    pub sigma: Array2<f64>,
    /// Rows whose leverage denominator hit [`LEVERAGE_EPS`].
    pub leverage_clamp_count: usize,
}

impl WeightCovariance {
    pub fn zeros(dim: usize) -> Self {
        Self {
            sigma: Array2::zeros((dim, dim)),
            leverage_clamp_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }
}

/// Streaming state for one Jackknife pass.
#[derive(Debug, Clone)]
pub struct JackknifeAccumulator<'p> {
    p: ArrayView2<'p, f64>,
    a: Array2<f64>,
    rows: usize,
    clamps: usize,
}

/// Per-batch by-products that callers may want besides the covariance.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub leverage: Array1<f64>,
}

impl<'p> JackknifeAccumulator<'p> {
    pub fn new(p: ArrayView2<'p, f64>) -> Result<Self> {
        let l = p.nrows();
        if p.ncols() != l {
            return Err(Error::shape("jackknife P", format!("{l}x{l}"), format!("{l}x{}", p.ncols())));
        }
        Ok(Self {
            p,
            a: Array2::zeros((l, l)),
            rows: 0,
            clamps: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Weighted contribution of one batch as a fresh accumulator.
    pub fn batch(&self, h: ArrayView2<f64>, r: ArrayView1<f64>) -> Result<(Self, BatchStats)> {
        let l = self.p.nrows();
        if h.ncols() != l {
            return Err(Error::shape("jackknife batch columns", l, h.ncols()));
        }
        if r.len() != h.nrows() {
            return Err(Error::shape("jackknife residuals", h.nrows(), r.len()));
        }
        let s_mat = h.dot(&self.p);
        let mut weighted = h.to_owned();
        let mut leverage = Array1::zeros(h.nrows());
        let mut clamps = 0;
        Zip::from(weighted.axis_iter_mut(Axis(0)))
            .and(s_mat.axis_iter(Axis(0)))
            .and(&r)
            .and(&mut leverage)
            .for_each(|mut row, s_row, &ri, lev| {
                *lev = s_row.dot(&row);
                let mut denom = 1.0 - *lev;
                if denom < LEVERAGE_EPS {
                    denom = LEVERAGE_EPS;
                    clamps += 1;
                }
                let w = ri * ri / denom;
                row.mapv_inplace(|v| v * w);
            });
        let part = Self {
            p: self.p,
            a: weighted.t().dot(&s_mat),
            rows: h.nrows(),
            clamps,
        };
        Ok((part, BatchStats { leverage }))
    }

    pub fn push(&mut self, h: ArrayView2<f64>, r: ArrayView1<f64>) -> Result<BatchStats> {
        let (part, stats) = self.batch(h, r)?;
        self.merge(&part);
        Ok(stats)
    }

    pub fn merge(&mut self, other: &Self) {
        self.a += &other.a;
        self.rows += other.rows;
        self.clamps += other.clamps;
    }

    pub fn finish(self) -> WeightCovariance {
        WeightCovariance {
            sigma: symmetrize(self.p.dot(&self.a).view()),
            leverage_clamp_count: self.clamps,
        }
    }
}

/// Jackknife covariance from a stream of hidden-output batches and the
/// full residual vector `r` (rows consumed in order).
pub fn jackknife_covariance<'a, I>(h_batches: I, r: ArrayView1<f64>, p: ArrayView2<f64>) -> Result<WeightCovariance>
where
    I: IntoIterator<Item = ArrayView2<'a, f64>>,
{
    let mut acc = JackknifeAccumulator::new(p)?;
    for h in h_batches {
        let start = acc.rows();
        let end = start + h.nrows();
        if end > r.len() {
            return Err(Error::shape("jackknife stream rows", r.len(), format!("at least {end}")));
        }
        acc.push(h, r.slice(s![start..end]))?;
    }
    if acc.rows() != r.len() {
        return Err(Error::shape("jackknife stream rows", r.len(), acc.rows()));
    }
    Ok(acc.finish())
}

/// `hᵢ·M·hᵢᵀ` for every row of `h`.
pub(crate) fn row_quadratic_forms(h: ArrayView2<f64>, m: ArrayView2<f64>) -> Array1<f64> {
    let hm = h.dot(&m);
    Zip::from(hm.axis_iter(Axis(0)))
        .and(h.axis_iter(Axis(0)))
        .map_collect(|a, b| a.dot(&b))
}

/// Bienaymé prediction variance `σ²ᵢ = hᵢ·Σ·hᵢᵀ`, clamped at zero.
pub fn prediction_variance(h: ArrayView2<f64>, sigma: ArrayView2<f64>, batch_rows: usize) -> Result<Array1<f64>> {
    let l = sigma.nrows();
    if sigma.ncols() != l {
        return Err(Error::shape("covariance", format!("{l}x{l}"), format!("{l}x{}", sigma.ncols())));
    }
    if h.ncols() != l {
        return Err(Error::shape("prediction variance columns", l, h.ncols()));
    }
    let mut out = Array1::zeros(h.nrows());
    batch::map_fold(
        h.nrows(),
        batch_rows,
        |r| Ok(row_quadratic_forms(h.slice(s![r, ..]), sigma)),
        |r, q| {
            out.slice_mut(s![r]).assign(&q.mapv(|v| v.max(0.0)));
            Ok(())
        },
    )?;
    Ok(out)
}
