//! Minimal dense network core: forward/backward passes, surrogate losses,
//! gradient reversal and the adaptive-moment optimizer.

pub mod checkpoint;
pub mod loss;
pub mod matrix;
pub mod mlp;
pub mod optim;

pub use loss::{loss, LossKind, LossOutput};
pub use matrix::Matrix;
pub use mlp::{
    grad_reverse, Activation, Backprop, Batch, Dense, ForwardPass, Gradients, LayerGrad, Mlp,
    Role, Scale,
};
pub use optim::{opt_step, AdamConfig, AdamState};
