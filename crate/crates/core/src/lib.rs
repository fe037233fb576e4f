//! Saliency-driven foveation for pixel-based reinforcement learning.
//!
//! The pipeline, per environment frame:
//!
//! 1. [`saliency::spectral_residual`] computes a normalized saliency map from
//!    the frame's luminance.
//! 2. [`foveation::blend_foveate`] attenuates non-salient pixels by the mask
//!    `S + alpha * (1 - S)`.
//! 3. [`foveation::preprocess_observation`] resizes and converts the result
//!    into the plane consumed by the [`agent`].
//!
//! [`perturbation`] provides the frame corruptions used to probe transfer,
//! [`maze`] the pixel-rendered gridworld, and [`experiment`] the training,
//! evaluation and reporting drivers used by the `attend` CLI.

pub mod agent;
pub mod error;
pub mod experiment;
pub mod foveation;
pub mod imaging;
pub mod maze;
pub mod perturbation;
pub mod rng;
pub mod saliency;

pub use error::{Error, Result};
