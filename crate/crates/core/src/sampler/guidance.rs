//! The only place the clean input is read during guided denoising.

use crate::error::{check_dim, Error, Result};

/// The clean image being certified. Its pixels are private to this module,
/// so sampling code can use the image only through [`apply_guidance`].
#[derive(Clone, Copy, Debug)]
pub struct CleanInput<'a>(&'a [f64]);

impl<'a> CleanInput<'a> {
    pub fn new(x: &'a [f64]) -> Self {
        CleanInput(x)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Shift the prediction toward the clean image: `(1 - s) x0_hat + s x`.
pub fn apply_guidance(x0_hat: &[f64], x: CleanInput<'_>, s: f64) -> Result<Vec<f64>> {
    check_dim(x0_hat.len(), x.0.len())?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::param(format!("guidance scale {s} outside [0,1]")));
    }
    if s == 0.0 {
        return Ok(x0_hat.to_vec());
    }
    if s == 1.0 {
        return Ok(x.0.to_vec());
    }
    Ok(x0_hat
        .iter()
        .zip(x.0)
        .map(|(p, c)| (1.0 - s) * p + s * c)
        .collect())
}
