//! Bivariate Gaussian emissions.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// Diagonal jitter added whenever a covariance is built or updated.
pub const COVARIANCE_JITTER: f64 = 1e-6;

/// A 2-D Gaussian with cached inverse and log-normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEmission {
    mean: Vector2<f64>,
    covariance: Matrix2<f64>,
    precision: Matrix2<f64>,
    log_norm: f64,
}

impl GaussianEmission {
    /// Builds an emission from an exact covariance. The matrix must already be SPD.
    pub fn new(mean: Vector2<f64>, covariance: Matrix2<f64>) -> Result<Self> {
        if !mean.iter().chain(covariance.iter()).all(|x| x.is_finite()) {
            return Err(Error::NumericalUnderflow(
                "non-finite emission parameter".into(),
            ));
        }
        // Symmetrize so round-off never leaks into the invariant.
        let off = 0.5 * (covariance[(0, 1)] + covariance[(1, 0)]);
        let covariance = Matrix2::new(covariance[(0, 0)], off, off, covariance[(1, 1)]);
        let det = covariance[(0, 0)] * covariance[(1, 1)] - off * off;
        if covariance[(0, 0)] <= 0.0 || det <= 0.0 {
            return Err(Error::NumericalUnderflow(format!(
                "covariance is not positive definite (det = {det:e})"
            )));
        }
        let precision = Matrix2::new(
            covariance[(1, 1)] / det,
            -off / det,
            -off / det,
            covariance[(0, 0)] / det,
        );
        let log_norm = -(2.0 * PI).ln() - 0.5 * det.ln();
        Ok(GaussianEmission {
            mean,
            covariance,
            precision,
            log_norm,
        })
    }

    /// Builds an emission after adding [`COVARIANCE_JITTER`] to the diagonal.
    pub fn with_jitter(mean: Vector2<f64>, covariance: Matrix2<f64>) -> Result<Self> {
        Self::new(mean, covariance + Matrix2::identity() * COVARIANCE_JITTER)
    }

    pub fn standard(mean: Vector2<f64>) -> Self {
        Self::new(mean, Matrix2::identity()).expect("identity is SPD")
    }

    pub fn mean(&self) -> &Vector2<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix2<f64> {
        &self.covariance
    }

    pub fn log_pdf(&self, x: &Vector2<f64>) -> f64 {
        let d = x - self.mean;
        self.log_norm - 0.5 * (d.transpose() * self.precision * d)[(0, 0)]
    }
}
