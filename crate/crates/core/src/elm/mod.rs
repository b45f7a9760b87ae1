//! Extreme Learning Machine: a frozen random hidden layer followed by a
//! ridge-regularized linear output layer.

mod layer;
mod model;
mod select;

pub use layer::{parse_specs, specs_to_string, Activation, HiddenLayer, NeuronSpec};
pub use model::{accumulate_gram, ElmModel};
pub use select::{fit_validated, select_gamma, GammaSelection, TIE_TOLERANCE};
