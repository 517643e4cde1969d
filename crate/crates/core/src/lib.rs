//! Adaptive diffusion denoised smoothing.
//!
//! A guided reverse-diffusion sampler that pulls its clean-image prediction
//! toward the input only while a per-pixel Gaussian-DP budget lasts, turned
//! into a randomized-smoothing classifier with a certified L2 radius. The
//! crate also carries the plain RS, one-shot (DDS) and multi-step
//! (DensePure) baselines, an analytic Gaussian-mixture denoiser that
//! replaces a trained diffusion model, and the statistics needed to certify.
//!
//! Monte Carlo loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec::Parallelism`].

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod data;
pub mod denoise;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod privacy;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod stats;

pub use error::{Error, Result};
