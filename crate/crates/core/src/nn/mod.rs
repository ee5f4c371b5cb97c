//! Minimal dense-network engine: forward/backward passes, losses, SGD and
//! Adam, a finite-difference gradient checker, and model files.
//!
//! All math is `f64`. Every network in the crate (autoencoder, generator,
//! discriminator, MLP baseline) is a [`NetParams`].

mod gradcheck;
mod loss;
mod net;
mod optim;
mod persist;

pub use gradcheck::{grad_check, LossKind, FD_STEP, REL_FLOOR};
pub use loss::{
    bce_heads, bce_logit_heads, bce_logits, bce_loss, clamp_prob, masked_mse_loss, mse_loss,
    PROB_EPS,
};
pub use net::{sigmoid, Activation, BatchTape, Dense, Gradients, LayerGrad, NetParams};
pub use optim::{adam_step, AdamConfig, AdamState, Sgd};
pub use persist::{ModelFile, ModelKind, MAGIC, VERSION};
