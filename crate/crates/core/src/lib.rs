//! Two-stage disease prediction for tabular health records with missing
//! values: a stacked autoencoder fills missing cells, then an auxiliary
//! classifier GAN's discriminator classifies records. Seven classical
//! baselines and a cross-validated evaluation harness sit alongside.

pub mod acgan;
pub mod baselines;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod impute;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
pub mod viz;
