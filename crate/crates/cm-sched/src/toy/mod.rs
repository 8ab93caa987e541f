//! Desk-scale consistency-training harness on 2D toy distributions.

pub mod checkpoint;
pub mod data;
pub mod loss;
pub mod model;
pub mod sample;
pub mod swd;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader};
pub use data::{sample_points, ToyDataset, DATA_DIM};
pub use loss::{ct_loss, LossKind, WeightingKind};
pub use model::{consistency_forward, ConsistencyParam, Gradients, ToyModel};
pub use sample::sample;
pub use swd::{evaluate_swd, unit_directions, wasserstein_1d};
pub use train::{
    model_swd, reference_points, train, LossChoice, RunMetrics, TrainConfig, EVAL_SAMPLE_SEED,
    REFERENCE_SEED, SWD_PROJECTION_SEED,
};
