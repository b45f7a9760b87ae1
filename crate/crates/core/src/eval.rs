//! Interval quality metrics and confidence filtering.

use std::fmt;

use crate::pipeline::IntervalPrediction;
use crate::{Error, Result};

/// Anything with a lower and upper bound.
pub trait Bounds {
    fn lower(&self) -> f64;
    fn upper(&self) -> f64;
}

impl Bounds for IntervalPrediction {
    fn lower(&self) -> f64 {
        self.lower
    }

    fn upper(&self) -> f64 {
        self.upper
    }
}

impl Bounds for (f64, f64) {
    fn lower(&self) -> f64 {
        self.0
    }

    fn upper(&self) -> f64 {
        self.1
    }
}

fn check_lengths(n_intervals: usize, n_targets: usize) -> Result<()> {
    if n_intervals != n_targets {
        return Err(Error::shape("intervals vs targets", n_intervals, n_targets));
    }
    if n_targets == 0 {
        return Err(Error::Domain("no samples to evaluate".into()));
    }
    Ok(())
}

/// Prediction interval coverage probability, boundaries inclusive.
pub fn picp<B: Bounds>(intervals: &[B], y: &[f64]) -> Result<f64> {
    check_lengths(intervals.len(), y.len())?;
    let covered = intervals
        .iter()
        .zip(y)
        .filter(|(b, &v)| b.lower() <= v && v <= b.upper())
        .count();
    Ok(covered as f64 / y.len() as f64)
}

fn target_range(y: &[f64]) -> Result<f64> {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(Error::Domain("target range is zero; NMPIW is undefined".into()));
    }
    Ok(range)
}

/// Normalized mean prediction interval width: mean width over target range.
pub fn nmpiw<B: Bounds>(intervals: &[B], y: &[f64]) -> Result<f64> {
    check_lengths(intervals.len(), y.len())?;
    let range = target_range(y)?;
    let mean_width = intervals.iter().map(|b| b.upper() - b.lower()).sum::<f64>() / y.len() as f64;
    Ok(mean_width / range)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalReport {
    pub picp: f64,
    pub nmpiw: f64,
    pub alpha: f64,
    pub n: usize,
}

impl IntervalReport {
    pub fn evaluate<B: Bounds>(intervals: &[B], y: &[f64], alpha: f64) -> Result<Self> {
        Ok(Self {
            picp: picp(intervals, y)?,
            nmpiw: nmpiw(intervals, y)?,
            alpha,
            n: y.len(),
        })
    }
}

impl fmt::Display for IntervalReport {
    /// Line-oriented `key=value` record.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "picp={}", self.picp)?;
        writeln!(f, "nmpiw={}", self.nmpiw)?;
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "alpha={}", self.alpha)
    }
}

/// One point of the uniform-width interval tradeoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub half_width: f64,
    pub nmpiw: f64,
    pub picp: f64,
}

/// PICP/NMPIW of uniform intervals `ŷ ± w` as `w` grows from 0 to `max|y − ŷ|`.
///
/// Coverage only changes at the sorted absolute residuals, so those are the
/// sampled widths: `w = 0` first, then `n_points − 1` breakpoints spread evenly
/// through the sorted list, ending at the largest. When `n_points − 1 ≥ n`
/// every breakpoint is included.
pub fn uniform_pi_curve(y_hat: &[f64], y: &[f64], n_points: usize) -> Result<Vec<CurvePoint>> {
    check_lengths(y_hat.len(), y.len())?;
    if n_points < 2 {
        return Err(Error::Domain(format!("curve needs at least 2 points, got {n_points}")));
    }
    let range = target_range(y)?;
    let n = y.len();
    let mut abs_res: Vec<f64> = y_hat.iter().zip(y).map(|(p, t)| (t - p).abs()).collect();
    abs_res.sort_by(f64::total_cmp);

    let mut ranks: Vec<usize> = if n_points > n {
        (1..=n).collect()
    } else {
        (1..n_points).map(|k| (k * n).div_ceil(n_points - 1)).collect()
    };
    ranks.dedup();

    let point = |w: f64| {
        // Count of residuals ≤ w, ties included.
        let covered = abs_res.partition_point(|&a| a <= w);
        CurvePoint {
            half_width: w,
            nmpiw: 2.0 * w / range,
            picp: covered as f64 / n as f64,
        }
    };
    let mut curve = Vec::with_capacity(ranks.len() + 1);
    curve.push(point(0.0));
    curve.extend(ranks.into_iter().map(|k| point(abs_res[k - 1])));
    Ok(curve)
}

/// Smallest threshold `θ` such that at least `coverage · n` scores are `≥ θ`.
///
/// Equivalent to picking the `⌈coverage · n⌉`-th largest score. Ties at `θ`
/// are all retained, so realized coverage can exceed the request.
pub fn coverage_threshold(scores: &[f64], coverage: f64) -> Result<f64> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::Domain(format!("coverage must lie in (0, 1], got {coverage}")));
    }
    if scores.is_empty() {
        return Err(Error::Domain("no scores to threshold".into()));
    }
    let n = scores.len();
    // The epsilon absorbs products like 0.7 · 10 = 7.000000000000001.
    let keep = ((coverage * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[keep - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    /// Score `|ŷ|`: one global threshold, as with an MSE-derived interval.
    Mse,
    /// Score `|ŷ| / s`: threshold scaled by each sample's interval.
    PerSample,
}

impl ScoreMode {
    pub fn name(self) -> &'static str {
        match self {
            ScoreMode::Mse => "mse",
            ScoreMode::PerSample => "per_sample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePoint {
    pub coverage: f64,
    pub theta: f64,
    pub retained: usize,
    /// `None` when no positive samples were retained.
    pub tp_rate: Option<f64>,
    /// `None` when no negative samples were retained.
    pub fp_rate: Option<f64>,
}

/// Confidence scores for a mode; `s = 0` yields an infinite per-sample score.
pub fn confidence_scores(y_hat: &[f64], s: Option<&[f64]>, mode: ScoreMode) -> Result<Vec<f64>> {
    match mode {
        ScoreMode::Mse => Ok(y_hat.iter().map(|v| v.abs()).collect()),
        ScoreMode::PerSample => {
            let s = s.ok_or_else(|| Error::Config("per-sample mode requires interval deviations".into()))?;
            if s.len() != y_hat.len() {
                return Err(Error::shape("interval deviations", y_hat.len(), s.len()));
            }
            Ok(y_hat.iter().zip(s).map(|(p, d)| p.abs() / d).collect())
        }
    }
}

/// TP/FP rates of `sign(ŷ)` (zero counts as positive) on the most confident
/// fraction of samples, for each requested coverage.
pub fn confusion_at_coverage(
    y_hat: &[f64],
    s: Option<&[f64]>,
    labels: &[f64],
    coverages: &[f64],
    mode: ScoreMode,
) -> Result<Vec<CoveragePoint>> {
    check_lengths(y_hat.len(), labels.len())?;
    if let Some((i, v)) = labels.iter().enumerate().find(|(_, &v)| v != 1.0 && v != -1.0) {
        return Err(Error::Domain(format!("label {i} is {v}, expected ±1")));
    }
    let scores = confidence_scores(y_hat, s, mode)?;
    coverages
        .iter()
        .map(|&coverage| {
            let theta = coverage_threshold(&scores, coverage)?;
            let (mut tp, mut pos, mut fp, mut neg) = (0usize, 0usize, 0usize, 0usize);
            for ((&sc, &p), &label) in scores.iter().zip(y_hat).zip(labels) {
                if sc < theta {
                    continue;
                }
                let predicted_pos = p >= 0.0;
                if label > 0.0 {
                    pos += 1;
                    tp += predicted_pos as usize;
                } else {
                    neg += 1;
                    fp += predicted_pos as usize;
                }
            }
            Ok(CoveragePoint {
                coverage,
                theta,
                retained: pos + neg,
                tp_rate: (pos > 0).then(|| tp as f64 / pos as f64),
                fp_rate: (neg > 0).then(|| fp as f64 / neg as f64),
            })
        })
        .collect()
}
