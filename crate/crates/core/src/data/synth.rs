//! Seeded synthetic benchmarks.
//!
//! The 1-d regression generator draws `x ~ U(lo, hi)` and
//! `y = f(x) + σ(x)·z`, `z ~ N(0, 1)`, with
//!
//! - `f(x) = sin(x) + 0.3·x` ([`MeanFunction::SineTrend`])
//! - `σ(x) = 0.1 + 0.4·u` ([`NoiseCurve::Widening`]) or
//!   `σ(x) = 0.1 + 0.4·exp(−((u − 0.5)/0.2)²)` ([`NoiseCurve::Bump`]),
//!   where `u = (x − lo)/(hi − lo)`; both vary fivefold over the range.
//!
//! The default range is `[0, 2π]`.
//!
//! The binary "skin-like" task has an illumination feature `t ~ U(0, 1)` in
//! column 0 and `d − 1` features `y·s/√(d−1) + σ(t)·ε` with
//! `σ(t) = σ_lo + (σ_hi − σ_lo)·t`, so class overlap grows with `t`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::linalg::normal_cdf;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanFunction {
    SineTrend,
}

impl MeanFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            MeanFunction::SineTrend => x.sin() + 0.3 * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseCurve {
    Widening,
    Bump,
}

impl NoiseCurve {
    /// Deviation at relative position `u ∈ [0, 1]`.
    pub fn eval(self, u: f64) -> f64 {
        match self {
            NoiseCurve::Widening => 0.1 + 0.4 * u,
            NoiseCurve::Bump => 0.1 + 0.4 * (-((u - 0.5) / 0.2).powi(2)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Constant(f64),
    InputDependent(NoiseCurve),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub mean: MeanFunction,
    pub noise: NoiseModel,
    pub x_range: (f64, f64),
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub const DEFAULT_RANGE: (f64, f64) = (0.0, 2.0 * PI);

    pub fn heteroscedastic(n: usize, seed: u64) -> Self {
        Self {
            mean: MeanFunction::SineTrend,
            noise: NoiseModel::InputDependent(NoiseCurve::Widening),
            x_range: Self::DEFAULT_RANGE,
            n,
            seed,
        }
    }

    pub fn homoscedastic(n: usize, sigma: f64, seed: u64) -> Self {
        Self {
            noise: NoiseModel::Constant(sigma),
            ..Self::heteroscedastic(n, seed)
        }
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn mean_at(&self, x: f64) -> f64 {
        self.mean.eval(x)
    }

    pub fn sigma_at(&self, x: f64) -> f64 {
        match self.noise {
            NoiseModel::Constant(c) => c,
            NoiseModel::InputDependent(curve) => {
                let (lo, hi) = self.x_range;
                curve.eval(((x - lo) / (hi - lo)).clamp(0.0, 1.0))
            }
        }
    }

    /// `n` evenly spaced points across the range, endpoints included.
    pub fn grid(&self, n: usize) -> Array1<f64> {
        let (lo, hi) = self.x_range;
        Array1::linspace(lo, hi, n)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.x_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("invalid x range [{lo}, {hi}]")));
        }
        if self.n == 0 {
            return Err(Error::Config("generator sample count must be >= 1".into()));
        }
        if let NoiseModel::Constant(c) = self.noise {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("constant noise must be finite and >= 0, got {c}")));
            }
        }
        Ok(())
    }
}

/// Noise-free mean and deviation per generated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub f: Array1<f64>,
    pub sigma: Array1<f64>,
}

/// Generated data with its ground truth kept apart from the training view.
#[derive(Debug, Clone)]
pub struct Synthetic {
    dataset: Dataset,
    truth: Truth,
}

impl Synthetic {
    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn truth(&self) -> &Truth {
        &self.truth
    }

    pub fn into_parts(self) -> (Dataset, Truth) {
        (self.dataset, self.truth)
    }
}

pub fn synth(spec: &GeneratorSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.x_range;
    let mut x = Array2::zeros((spec.n, 1));
    let mut y = Array1::zeros(spec.n);
    let mut f = Array1::zeros(spec.n);
    let mut sigma = Array1::zeros(spec.n);
    for i in 0..spec.n {
        let xi = rng.random_range(lo..hi);
        let z: f64 = StandardNormal.sample(&mut rng);
        x[[i, 0]] = xi;
        f[i] = spec.mean_at(xi);
        sigma[i] = spec.sigma_at(xi);
        y[i] = f[i] + sigma[i] * z;
    }
    Ok(Synthetic {
        dataset: Dataset::new(x, y)?.with_feature_names(vec!["x".into()])?,
        truth: Truth { f, sigma },
    })
}

/// Configuration of the binary skin-like task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinlikeSpec {
    pub n: usize,
    pub d_features: usize,
    /// Class separation along the informative direction.
    pub separation: f64,
    pub noise_low: f64,
    pub noise_high: f64,
    pub seed: u64,
}

impl SkinlikeSpec {
    /// Default overlap: Bayes accuracy ≈ 88.3%.
    pub fn new(n: usize, d_features: usize, seed: u64) -> Self {
        Self {
            n,
            d_features,
            separation: 1.0,
            noise_low: 0.2,
            noise_high: 1.5,
            seed,
        }
    }

    /// Noise-free variant whose classes are linearly separable.
    pub fn separable(n: usize, d_features: usize, seed: u64) -> Self {
        Self {
            noise_low: 0.0,
            noise_high: 0.0,
            ..Self::new(n, d_features, seed)
        }
    }

    pub fn noise_at(&self, t: f64) -> f64 {
        self.noise_low + (self.noise_high - self.noise_low) * t
    }

    /// Accuracy of the Bayes rule `sign(Σ features₁..)`:
    /// `∫₀¹ Φ(s / σ(t)) dt`, by composite Simpson quadrature.
    pub fn bayes_accuracy(&self) -> f64 {
        let acc_at = |t: f64| {
            let s = self.noise_at(t);
            if s == 0.0 {
                1.0
            } else {
                normal_cdf(self.separation / s)
            }
        };
        let m = 2000;
        let h = 1.0 / m as f64;
        let mut sum = acc_at(0.0) + acc_at(1.0);
        for k in 1..m {
            sum += acc_at(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::Config(format!("skin-like sample count must be even and positive, got {}", self.n)));
        }
        if self.d_features < 2 {
            return Err(Error::Config(format!("skin-like task needs >= 2 features, got {}", self.d_features)));
        }
        if !(self.noise_low >= 0.0 && self.noise_high >= 0.0 && self.separation > 0.0) {
            return Err(Error::Config("skin-like noise must be >= 0 and separation > 0".into()));
        }
        Ok(())
    }
}

pub fn synth_skinlike(n: usize, d_features: usize, seed: u64) -> Result<Dataset> {
    synth_skinlike_with(&SkinlikeSpec::new(n, d_features, seed))
}

/// Balanced classes: exactly `n/2` samples per label, in shuffled order.
pub fn synth_skinlike_with(spec: &SkinlikeSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.d_features;
    let shift = spec.separation / ((d - 1) as f64).sqrt();
    let mut labels: Vec<f64> = (0..spec.n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut rng);
    let mut x = Array2::zeros((spec.n, d));
    for (i, &label) in labels.iter().enumerate() {
        let t: f64 = rng.random();
        let s = spec.noise_at(t);
        x[[i, 0]] = t;
        for j in 1..d {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = label * shift + s * e;
        }
    }
    Dataset::binary(x, Array1::from(labels))
}
