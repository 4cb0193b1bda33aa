//! Normal-Inverse-Wishart prior over a bivariate Gaussian's mean and covariance.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmission;

use super::dist::sample_gamma;

const DIM: f64 = 2.0;

/// `mu | Sigma ~ N(mean, Sigma / kappa)`, `Sigma ~ IW(scale, dof)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiwPrior {
    pub mean: Vector2<f64>,
    /// Mean confidence (pseudo-count on the mean).
    pub kappa: f64,
    pub scale: Matrix2<f64>,
    pub dof: f64,
}

impl Default for NiwPrior {
    /// Weakly informative at unit scale: `mean = 0`, `kappa = 0.5`, `scale = 0.75 I`, `dof = 4`.
    fn default() -> Self {
        NiwPrior {
            mean: Vector2::zeros(),
            kappa: 0.5,
            scale: Matrix2::identity() * 0.75,
            dof: DIM + 2.0,
        }
    }
}

impl NiwPrior {
    pub fn validate(&self) -> Result<()> {
        let s = &self.scale;
        let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidConfig("NIW kappa must be positive".into()));
        }
        if !(self.dof > DIM - 1.0) {
            return Err(Error::InvalidConfig("NIW dof must exceed d - 1".into()));
        }
        if (s[(0, 1)] - s[(1, 0)]).abs() > 1e-12 || !(s[(0, 0)] > 0.0) || !(det > 0.0) {
            return Err(Error::InvalidConfig("NIW scale must be SPD".into()));
        }
        Ok(())
    }

    /// Conjugate update with the given points.
    pub fn posterior(&self, points: &[Vector2<f64>]) -> NiwPrior {
        if points.is_empty() {
            return self.clone();
        }
        let n = points.len() as f64;
        let xbar = points.iter().fold(Vector2::zeros(), |a, x| a + x) / n;
        let scatter = points
            .iter()
            .fold(Matrix2::zeros(), |a, x| a + (x - xbar) * (x - xbar).transpose());
        let kappa_n = self.kappa + n;
        let d = xbar - self.mean;
        NiwPrior {
            mean: (self.mean * self.kappa + xbar * n) / kappa_n,
            kappa: kappa_n,
            scale: self.scale + scatter + d * d.transpose() * (self.kappa * n / kappa_n),
            dof: self.dof + n,
        }
    }

    /// Draws `Sigma ~ IW(scale, dof)` via the Bartlett decomposition of its inverse.
    pub fn sample_covariance<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix2<f64> {
        let inv = self.scale.try_inverse().expect("validated SPD scale");
        let inv = (inv + inv.transpose()) * 0.5;
        let l = inv.cholesky().expect("validated SPD scale").l();
        let c1 = (2.0 * sample_gamma(self.dof / 2.0, 1.0, rng)).sqrt();
        let c2 = (2.0 * sample_gamma((self.dof - 1.0) / 2.0, 1.0, rng)).sqrt();
        let n21: f64 = StandardNormal.sample(rng);
        let a = Matrix2::new(c1, 0.0, n21, c2);
        let la = l * a;
        let w = la * la.transpose();
        let sigma = w.try_inverse().unwrap_or_else(Matrix2::identity);
        (sigma + sigma.transpose()) * 0.5
    }

    /// Draws `(mu, Sigma)` and returns it as a jittered emission.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GaussianEmission> {
        let sigma = self.sample_covariance(rng);
        let chol = (sigma / self.kappa)
            .cholesky()
            .map(|c| c.l())
            .unwrap_or_else(|| Matrix2::identity() * (sigma.trace() / (2.0 * self.kappa)).sqrt());
        let eps = Vector2::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        GaussianEmission::with_jitter(self.mean + chol * eps, sigma)
    }
}
