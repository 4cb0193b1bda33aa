//! Random draws used by the sampler, robust to very small shape parameters.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::logspace::log_sum_exp;

/// `log` of a Gamma(shape, 1) draw. Shapes below one use `G(a) = G(a + 1) U^(1/a)` so the
/// result stays finite when the draw itself would underflow.
pub fn log_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if !(shape > 0.0) {
        return f64::NEG_INFINITY;
    }
    if shape < 1.0 {
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = 1.0 - rng.random::<f64>();
        g.ln() + u.ln() / shape
    } else {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
    }
}

/// Dirichlet draw. Non-positive parameters yield exact zeros; at least one must be positive.
pub fn sample_dirichlet<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = alphas.iter().map(|&a| log_gamma_draw(a, rng)).collect();
    let z = log_sum_exp(&logs);
    assert!(z.is_finite(), "Dirichlet needs a positive parameter");
    let mut p: Vec<f64> = logs.iter().map(|l| (l - z).exp()).collect();
    // Exact renormalization keeps the simplex invariant at machine precision.
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Gamma(shape, rate) draw.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    log_gamma_draw(shape, rng).exp() / rate
}

/// Beta(a, b) draw via two Gamma variates.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = log_gamma_draw(a, rng);
    let y = log_gamma_draw(b, rng);
    let m = x.max(y);
    let (ex, ey) = ((x - m).exp(), (y - m).exp());
    ex / (ex + ey)
}

pub fn sample_bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}
