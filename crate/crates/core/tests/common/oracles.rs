//! Reference computations that share no code with the library's update path.

use nalgebra::{DMatrix, DVector};

/// Closed-form conjugate posterior from the whole design matrix:
/// `Sigma_N = (Sigma_0^-1 + X^T X / s)^-1`,
/// `mu_N = Sigma_N (Sigma_0^-1 mu_0 + X^T y / s)`, via LU inversion.
pub fn batch_posterior(
    mu0: &DVector<f64>,
    cov0: &DMatrix<f64>,
    xs: &[Vec<f64>],
    ys: &[f64],
    noise_var: f64,
) -> (DVector<f64>, DMatrix<f64>) {
    let dim = mu0.len();
    let x = DMatrix::from_fn(xs.len(), dim, |i, j| xs[i][j]);
    let y = DVector::from_column_slice(ys);
    let prior_precision = cov0.clone().try_inverse().expect("prior invertible");
    let precision = &prior_precision + x.transpose() * &x / noise_var;
    let cov = precision.try_inverse().expect("posterior invertible");
    let mu = &cov * (&prior_precision * mu0 + x.transpose() * y / noise_var);
    (mu, cov)
}

/// `P(c = 1 | x)` by evaluating both Gaussian densities directly.
pub fn two_gaussian_posterior(x: f64, sigma: f64) -> f64 {
    let pdf = |mean: f64| {
        let z = (x - mean) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let (l0, l1) = (pdf(0.0), pdf(1.0));
    0.5 * l1 / (0.5 * l0 + 0.5 * l1)
}
