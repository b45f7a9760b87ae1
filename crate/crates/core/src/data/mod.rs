//! Data ingestion, synthetic generators, splitting, standardization and
//! model persistence.

mod dataset;
mod persist;
mod split;
mod standardize;
mod synth;

pub use dataset::{load_csv, read_table, Dataset, Table, TargetColumn, Task};
pub use persist::{load_model, model_from_str, model_to_string, save_model, FORMAT_VERSION};
pub use split::{split, split_indices};
pub use standardize::StandardizationParams;
pub use synth::{
    synth, synth_skinlike, synth_skinlike_with, GeneratorSpec, MeanFunction, NoiseCurve, NoiseModel, SkinlikeSpec,
    Synthetic, Truth,
};
