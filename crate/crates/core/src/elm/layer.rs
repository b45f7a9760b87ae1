use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" | "sigm" => Ok(Activation::Sigmoid),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// A block of `count` hidden neurons sharing one activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeuronSpec {
    pub kind: Activation,
    pub count: usize,
}

impl NeuronSpec {
    pub fn new(kind: Activation, count: usize) -> Self {
        Self { kind, count }
    }
}

impl fmt::Display for NeuronSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.name(), self.count)
    }
}

impl FromStr for NeuronSpec {
    type Err = Error;

    /// `kind:count`, e.g. `tanh:10`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, count) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("neuron spec `{s}` is not of the form kind:count")))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad neuron count in `{s}`")))?;
        if count == 0 {
            return Err(Error::Config(format!("neuron count must be >= 1 in `{s}`")));
        }
        Ok(Self { kind: kind.parse()?, count })
    }
}

/// Parse a comma-separated list such as `linear:1,tanh:10`.
pub fn parse_specs(s: &str) -> Result<Vec<NeuronSpec>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

pub fn specs_to_string(specs: &[NeuronSpec]) -> String {
    specs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Random, frozen input-to-hidden projection.
///
/// `weights` is `(d + 1) × L`; its last row multiplies a constant `+1` input
/// and acts as the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer {
    d: usize,
    specs: Vec<NeuronSpec>,
    kinds: Vec<Activation>,
    seed: u64,
    weights: Array2<f64>,
}

impl HiddenLayer {
    /// Draw i.i.d. standard normal weights scaled by `1/√(d+1)` from a
    /// ChaCha8 stream seeded with `seed`, filled row-major.
    pub fn new(d: usize, specs: &[NeuronSpec], seed: u64) -> Result<Self> {
        let kinds = Self::validate(d, specs)?;
        let width = kinds.len();
        let scale = 1.0 / ((d + 1) as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = Array2::from_shape_simple_fn((d + 1, width), || {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        });
        Ok(Self {
            d,
            specs: specs.to_vec(),
            kinds,
            seed,
            weights,
        })
    }

    /// Rebuild a layer from stored parts, e.g. when loading a model file.
    pub fn from_parts(d: usize, specs: &[NeuronSpec], seed: u64, weights: Array2<f64>) -> Result<Self> {
        let kinds = Self::validate(d, specs)?;
        if weights.dim() != (d + 1, kinds.len()) {
            return Err(Error::shape(
                "hidden layer weights",
                format!("{}x{}", d + 1, kinds.len()),
                format!("{}x{}", weights.nrows(), weights.ncols()),
            ));
        }
        Ok(Self {
            d,
            specs: specs.to_vec(),
            kinds,
            seed,
            weights,
        })
    }

    fn validate(d: usize, specs: &[NeuronSpec]) -> Result<Vec<Activation>> {
        if d == 0 {
            return Err(Error::Config("input dimension must be >= 1".into()));
        }
        if specs.is_empty() {
            return Err(Error::Config("hidden layer needs at least one neuron spec".into()));
        }
        if let Some(bad) = specs.iter().find(|s| s.count == 0) {
            return Err(Error::Config(format!("neuron spec {bad} has zero count")));
        }
        Ok(specs
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.kind, s.count))
            .collect())
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    /// Number of hidden neurons `L`.
    pub fn width(&self) -> usize {
        self.kinds.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn specs(&self) -> &[NeuronSpec] {
        &self.specs
    }

    pub fn kinds(&self) -> &[Activation] {
        &self.kinds
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Hidden layer output `H = φ([X 1]·W)` for a block of rows.
    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.d {
            return Err(Error::shape("hidden transform input columns", self.d, x.ncols()));
        }
        let mut h = x.dot(&self.weights.slice(s![..self.d, ..]));
        let bias = self.weights.row(self.d);
        for mut row in h.axis_iter_mut(Axis(0)) {
            for ((v, &b), &kind) in row.iter_mut().zip(bias).zip(&self.kinds) {
                *v = kind.apply(*v + b);
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array};

    fn specs(s: &str) -> Vec<NeuronSpec> {
        parse_specs(s).unwrap()
    }

    #[test]
    fn seeded_construction_is_bitwise_deterministic() {
        let a = HiddenLayer::new(3, &specs("tanh:10,linear:1"), 7).unwrap();
        let b = HiddenLayer::new(3, &specs("tanh:10,linear:1"), 7).unwrap();
        assert_eq!(a, b);
        let c = HiddenLayer::new(3, &specs("tanh:10,linear:1"), 8).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn width_counts_all_specs() {
        let l = HiddenLayer::new(147, &specs("linear:147,sigmoid:200"), 1).unwrap();
        assert_eq!(l.width(), 347);
        assert_eq!(l.weights().dim(), (148, 347));
    }

    #[test]
    fn linear_neurons_are_affine() {
        let l = HiddenLayer::new(2, &specs("linear:2"), 99).unwrap();
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, -3.0]];
        let h = l.transform(x.view()).unwrap();
        // h(x) = h(0) + x0·(h(e0) − h(0)) + x1·(h(e1) − h(0))
        let h0 = h.row(0);
        let expected = &h0 + &((&h.row(1) - &h0) * 2.0) + &((&h.row(2) - &h0) * -3.0);
        for (a, b) in h.row(3).iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_give_activation_at_zero() {
        let x = Array::from_shape_fn((4, 2), |(i, j)| (i + j) as f64);
        let tanh = HiddenLayer::from_parts(2, &specs("tanh:3"), 0, Array2::zeros((3, 3))).unwrap();
        assert!(tanh.transform(x.view()).unwrap().iter().all(|&v| v == 0.0));
        let sig = HiddenLayer::from_parts(2, &specs("sigmoid:3"), 0, Array2::zeros((3, 3))).unwrap();
        assert!(sig.transform(x.view()).unwrap().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn scalar_tanh_evaluation() {
        let l = HiddenLayer::from_parts(1, &specs("tanh:1"), 0, array![[1.0], [0.0]]).unwrap();
        let h = l.transform(array![[2.0]].view()).unwrap();
        assert!((h[[0, 0]] - 0.964_027_580_075_817).abs() < 1e-12);
    }

    #[test]
    fn bias_row_is_fed_constant_one() {
        let l = HiddenLayer::from_parts(1, &specs("linear:1"), 0, array![[2.0], [0.5]]).unwrap();
        let h = l.transform(array![[3.0]].view()).unwrap();
        assert_eq!(h[[0, 0]], 6.5);
    }

    #[test]
    fn configuration_errors() {
        assert!(matches!(HiddenLayer::new(3, &[], 0), Err(Error::Config(_))));
        assert!(matches!(HiddenLayer::new(0, &specs("tanh:1"), 0), Err(Error::Config(_))));
        assert!("tanh:0".parse::<NeuronSpec>().is_err());
        assert!("relu:3".parse::<NeuronSpec>().is_err());
        assert!("tanh".parse::<NeuronSpec>().is_err());
        let l = HiddenLayer::new(3, &specs("tanh:2"), 0).unwrap();
        assert!(matches!(l.transform(Array2::zeros((2, 4)).view()), Err(Error::Shape { .. })));
        assert!(HiddenLayer::from_parts(3, &specs("tanh:2"), 0, Array2::zeros((3, 2))).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        let s = specs("linear:1, tanh:10,sigmoid:3");
        assert_eq!(specs_to_string(&s), "linear:1,tanh:10,sigmoid:3");
        assert_eq!(parse_specs(&specs_to_string(&s)).unwrap(), s);
    }
}
