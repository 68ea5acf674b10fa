//! Multisource domain-adversarial networks: hard-max and smoothed training.

pub mod config;
pub mod dann;
pub mod model;
pub mod step;
pub mod train;

pub use config::{Mode, TrainConfig};
pub use dann::{dann_step, DannTrace};
pub use model::{MdanModel, ModelConfig};
pub use step::{
    domain_scores, hard_choice, smoothed_objective, soft_weights, step, step_gradients, step_hard,
    step_seed, step_soft, Choice, Evaluation, MdanOptimizer, StepGradients, StepTrace,
    TARGET_STREAM,
};
pub use train::{
    evaluate, predict, score, steps_per_epoch, train, train_dann, train_source_only, Metric,
    TrainOutput,
};
