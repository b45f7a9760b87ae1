//! Two-stage per-sample prediction intervals.
//!
//! Fitting:
//! 1. train `m_data` on `(X, y)`;
//! 2. predict `ŷ` on the training inputs;
//! 3. Jackknife covariance `Σ_data` from the residuals `r = y − ŷ`;
//! 4. train `m_var` on `(X, r²)`;
//! 5. Jackknife covariance `Σ_var` from `m_var`'s own residuals.
//!
//! Steps 2 and 3 share one pass over the data, as do `m_var`'s prediction and
//! its Jackknife. Training data is not kept in the returned model.
//!
//! Prediction combines `ŷ`, the clamped `r̂²` and both prediction variances
//! into `ŷ ± z(α)·s`, `s² = max(r̂², 0) + σ²_r + σ²_y`.

use std::time::{Duration, Instant};

use ndarray::{s, Array1, ArrayView1, ArrayView2};

use crate::batch;
use crate::data::{synth, GeneratorSpec, StandardizationParams};
use crate::elm::{fit_validated, parse_specs, ElmModel, GammaSelection, HiddenLayer, NeuronSpec};
use crate::jackknife::{row_quadratic_forms, JackknifeAccumulator, WeightCovariance, LEVERAGE_EPS};
use crate::linalg::std_normal_quantile;
use crate::{derive_seed, Error, Result, DEFAULT_BATCH_ROWS};

/// Seeds for every random choice made while fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiSeeds {
    pub data_layer: u64,
    pub var_layer: u64,
    pub validation: u64,
}

impl PiSeeds {
    pub fn from_master(seed: u64) -> Self {
        Self {
            data_layer: derive_seed(seed, 1),
            var_layer: derive_seed(seed, 2),
            validation: derive_seed(seed, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiConfig {
    pub specs_data: Vec<NeuronSpec>,
    pub specs_var: Vec<NeuronSpec>,
    /// Candidate ridge parameters; each model validates its own γ.
    pub gamma_grid: Vec<f64>,
    pub seeds: PiSeeds,
    pub batch_rows: usize,
    pub val_fraction: f64,
    /// Train `m_var` on squared leave-one-out residuals `(rᵢ/(1 − ℓᵢ))²`
    /// instead of the in-sample `rᵢ²`. Off by default.
    pub leave_out_residuals: bool,
}

impl Default for PiConfig {
    fn default() -> Self {
        let specs = parse_specs("linear:1,tanh:10").expect("valid default specs");
        Self {
            specs_data: specs.clone(),
            specs_var: specs,
            gamma_grid: default_gamma_grid(),
            seeds: PiSeeds::from_master(0),
            batch_rows: DEFAULT_BATCH_ROWS,
            val_fraction: 0.3,
            leave_out_residuals: false,
        }
    }
}

/// `10⁻⁶, 10⁻⁵, …, 10⁴`.
pub fn default_gamma_grid() -> Vec<f64> {
    (-6..=4).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiMetadata {
    pub n_train: usize,
    pub seeds: PiSeeds,
    pub gamma_data: f64,
    pub gamma_var: f64,
    pub standardization: StandardizationParams,
}

/// Data model, variance model and the weight covariance of each.
#[derive(Debug, Clone, PartialEq)]
pub struct PiModel {
    pub data: ElmModel,
    pub sigma_data: WeightCovariance,
    pub var: ElmModel,
    pub sigma_var: WeightCovariance,
    pub meta: PiMetadata,
}

impl PiModel {
    pub fn input_dim(&self) -> usize {
        self.meta.standardization.dim()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitTimings {
    pub elm_data: Duration,
    pub jackknife_data: Duration,
    pub elm_var: Duration,
    pub jackknife_var: Duration,
}

impl FitTimings {
    pub fn total(&self) -> Duration {
        self.elm_data + self.jackknife_data + self.elm_var + self.jackknife_var
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub selection_data: GammaSelection,
    pub selection_var: GammaSelection,
    pub timings: FitTimings,
}

/// Per-sample interval with the variance components it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPrediction {
    pub y_hat: f64,
    pub lower: f64,
    pub upper: f64,
    /// Combined deviation `sqrt(max(r̂², 0) + σ²_r + σ²_y)`.
    pub s: f64,
    /// Variance model output before clamping at zero.
    pub r2_raw: f64,
    pub sigma2_r: f64,
    pub sigma2_y: f64,
}

impl IntervalPrediction {
    pub fn r2(&self) -> f64 {
        self.r2_raw.max(0.0)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

pub fn fit_pi(x: ArrayView2<f64>, y: ArrayView1<f64>, config: &PiConfig) -> Result<PiModel> {
    fit_pi_with_report(x, y, config).map(|(m, _)| m)
}

pub fn fit_pi_with_report(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    config: &PiConfig,
) -> Result<(PiModel, FitReport)> {
    let n = x.nrows();
    if n != y.len() {
        return Err(Error::shape("training targets", n, y.len()));
    }
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, found: n });
    }
    batch::check_batch_rows(config.batch_rows)?;
    let d = x.ncols();
    let standardization = StandardizationParams::fit(x)?;
    let xs = standardization.apply(x)?;
    let xs = xs.view();
    let mut timings = FitTimings::default();

    let clock = Instant::now();
    let layer = HiddenLayer::new(d, &config.specs_data, config.seeds.data_layer)?;
    let (data, selection_data) = fit_validated(
        xs,
        y,
        layer,
        &config.gamma_grid,
        config.val_fraction,
        config.seeds.validation,
        config.batch_rows,
    )?;
    timings.elm_data = clock.elapsed();

    let clock = Instant::now();
    let (sigma_data, residuals, leverage) = residual_jackknife(&data, xs, y, config.batch_rows)?;
    timings.jackknife_data = clock.elapsed();

    let targets = if config.leave_out_residuals {
        residuals
            .iter()
            .zip(&leverage)
            .map(|(r, l)| (r / (1.0 - l).max(LEVERAGE_EPS)).powi(2))
            .collect::<Array1<f64>>()
    } else {
        residuals.mapv(|r| r * r)
    };
    drop(residuals);

    let clock = Instant::now();
    let layer = HiddenLayer::new(d, &config.specs_var, config.seeds.var_layer)?;
    let (var, selection_var) = fit_validated(
        xs,
        targets.view(),
        layer,
        &config.gamma_grid,
        config.val_fraction,
        derive_seed(config.seeds.validation, 1),
        config.batch_rows,
    )?;
    timings.elm_var = clock.elapsed();

    let clock = Instant::now();
    let (sigma_var, _, _) = residual_jackknife(&var, xs, targets.view(), config.batch_rows)?;
    timings.jackknife_var = clock.elapsed();

    let model = PiModel {
        meta: PiMetadata {
            n_train: n,
            seeds: config.seeds,
            gamma_data: data.gamma(),
            gamma_var: var.gamma(),
            standardization,
        },
        data,
        sigma_data,
        var,
        sigma_var,
    };
    let report = FitReport {
        selection_data,
        selection_var,
        timings,
    };
    Ok((model, report))
}

/// One pass: predictions, residuals `t − t̂`, leverages and the Jackknife covariance.
fn residual_jackknife(
    model: &ElmModel,
    x: ArrayView2<f64>,
    targets: ArrayView1<f64>,
    batch_rows: usize,
) -> Result<(WeightCovariance, Array1<f64>, Array1<f64>)> {
    let n = x.nrows();
    let template = JackknifeAccumulator::new(model.p().view())?;
    let mut total = template.clone();
    let mut residuals = Array1::zeros(n);
    let mut leverage = Array1::zeros(n);
    batch::map_fold(
        n,
        batch_rows,
        |r| {
            let h = model.hidden(x.slice(s![r.clone(), ..]))?;
            let resid = &targets.slice(s![r]) - &h.dot(model.beta());
            let (part, stats) = template.batch(h.view(), resid.view())?;
            Ok((resid, stats.leverage, part))
        },
        |r, (resid, lev, part)| {
            residuals.slice_mut(s![r.clone()]).assign(&resid);
            leverage.slice_mut(s![r]).assign(&lev);
            total.merge(&part);
            Ok(())
        },
    )?;
    Ok((total.finish(), residuals, leverage))
}

/// Intervals at coverage `alpha` for raw (unstandardized) inputs.
pub fn predict_pi(
    model: &PiModel,
    x: ArrayView2<f64>,
    alpha: f64,
    batch_rows: usize,
) -> Result<Vec<IntervalPrediction>> {
    let z = std_normal_quantile(alpha)?;
    if x.ncols() != model.input_dim() {
        return Err(Error::shape("prediction input columns", model.input_dim(), x.ncols()));
    }
    let mut out = Vec::with_capacity(x.nrows());
    batch::map_fold(
        x.nrows(),
        batch_rows,
        |r| {
            let xs = model.meta.standardization.apply(x.slice(s![r, ..]))?;
            let hd = model.data.hidden(xs.view())?;
            let y_hat = hd.dot(model.data.beta());
            let sigma2_y = row_quadratic_forms(hd.view(), model.sigma_data.sigma.view());
            drop(hd);
            let hv = model.var.hidden(xs.view())?;
            let r2_raw = hv.dot(model.var.beta());
            let sigma2_r = row_quadratic_forms(hv.view(), model.sigma_var.sigma.view());
            Ok((0..y_hat.len())
                .map(|i| interval(y_hat[i], r2_raw[i], sigma2_r[i].max(0.0), sigma2_y[i].max(0.0), z))
                .collect::<Vec<_>>())
        },
        |_, rows| {
            out.extend(rows);
            Ok(())
        },
    )?;
    Ok(out)
}

fn interval(y_hat: f64, r2_raw: f64, sigma2_r: f64, sigma2_y: f64, z: f64) -> IntervalPrediction {
    let s = (r2_raw.max(0.0) + sigma2_r + sigma2_y).sqrt();
    IntervalPrediction {
        y_hat,
        lower: y_hat - z * s,
        upper: y_hat + z * s,
        s,
        r2_raw,
        sigma2_r,
        sigma2_y,
    }
}

/// Mean variance components on a fixed grid for one training-set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    pub mean_sigma2_y: f64,
    pub mean_sigma2_r: f64,
    pub mean_r2: f64,
    pub mean_half_width: f64,
}

impl DecayRow {
    /// Model-uncertainty part of the variance, `σ²_y + σ²_r`.
    pub fn model_uncertainty(&self) -> f64 {
        self.mean_sigma2_y + self.mean_sigma2_r
    }
}

/// Fit on fresh generator draws of each size in `n_values` and average the
/// variance components over `grid_points` evenly spaced test inputs.
pub fn uncertainty_decay_curve(
    spec: &GeneratorSpec,
    n_values: &[usize],
    alpha: f64,
    trials: usize,
    config: &PiConfig,
    grid_points: usize,
) -> Result<Vec<DecayRow>> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("N values must be nonempty and strictly increasing".into()));
    }
    if grid_points == 0 {
        return Err(Error::Config("grid must have at least one point".into()));
    }
    let grid = spec.grid(grid_points).insert_axis(ndarray::Axis(1));
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut acc = [0.0; 4];
        for trial in 0..trials {
            let stream = derive_seed(n as u64, trial as u64);
            let draw = synth(&spec.with_n(n).with_seed(derive_seed(spec.seed, stream)))?;
            let cfg = PiConfig {
                seeds: PiSeeds::from_master(derive_seed(stream, 0x5eed)),
                ..config.clone()
            };
            let model = fit_pi(draw.dataset().x().view(), draw.dataset().y().view(), &cfg)?;
            let preds = predict_pi(&model, grid.view(), alpha, config.batch_rows)?;
            let m = preds.len() as f64;
            acc[0] += preds.iter().map(|p| p.sigma2_y).sum::<f64>() / m;
            acc[1] += preds.iter().map(|p| p.sigma2_r).sum::<f64>() / m;
            acc[2] += preds.iter().map(|p| p.r2()).sum::<f64>() / m;
            acc[3] += preds.iter().map(|p| p.half_width()).sum::<f64>() / m;
        }
        let t = trials as f64;
        rows.push(DecayRow {
            n,
            mean_sigma2_y: acc[0] / t,
            mean_sigma2_r: acc[1] / t,
            mean_r2: acc[2] / t,
            mean_half_width: acc[3] / t,
        });
    }
    Ok(rows)
}
