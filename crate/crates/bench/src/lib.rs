//! Shared fixtures for the benchmark targets.

use bmolab_core::{CellFn, Model};

/// Builds a model once and pulls out the named function.
pub fn model_with_fn(spec: bmolab_core::ModelSpec, name: &str) -> (Model, CellFn) {
    let model = spec.build().expect("benchmark model builds");
    let f = model.function(name).expect("benchmark function exists").clone();
    (model, f)
}
