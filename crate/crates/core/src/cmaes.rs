//! CMA-ES with rank-one and rank-mu covariance updates and cumulative
//! step-size adaptation, in ask/tell form.
//!
//! Reference: N. Hansen, "The CMA Evolution Strategy: A Tutorial" (2016).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct CmaEs {
    dim: usize,
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_c: f64,
    c_sigma: f64,
    c_1: f64,
    c_mu: f64,
    damp_sigma: f64,
    chi_n: f64,
    pub mean: DVector<f64>,
    pub sigma: f64,
    initial_sigma: f64,
    path_c: DVector<f64>,
    path_sigma: DVector<f64>,
    cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    generation: usize,
}

/// Default population size `4 + floor(3 ln d)`.
pub fn default_lambda(dim: usize) -> usize {
    4 + (3.0 * (dim.max(1) as f64).ln()).floor() as usize
}

impl CmaEs {
    pub fn new(mean: Vec<f64>, sigma: f64, lambda: usize) -> Self {
        let n = mean.len().max(1) as f64;
        let lambda = lambda.max(2);
        let mu = lambda / 2;
        let raw: Vec<f64> =
            (0..mu).map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln()).collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let damp_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        let dim = mean.len();
        Self {
            dim,
            lambda,
            weights,
            mu_eff,
            c_c,
            c_sigma,
            c_1,
            c_mu,
            damp_sigma,
            chi_n,
            mean: DVector::from_vec(mean),
            sigma,
            initial_sigma: sigma,
            path_c: DVector::zeros(dim),
            path_sigma: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim),
            basis: DMatrix::identity(dim, dim),
            scales: DVector::from_element(dim, 1.0),
            generation: 0,
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn mu(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Draws `count` points from `N(mean, sigma^2 C)`.
    pub fn ask<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| {
                let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = &self.basis * z.component_mul(&self.scales);
                (&self.mean + y * self.sigma).iter().copied().collect()
            })
            .collect()
    }

    /// Updates the distribution from evaluated points sorted best first.
    /// Only the best `mu` points are used.
    pub fn tell(&mut self, sorted: &[Vec<f64>]) {
        let mu = self.mu().min(sorted.len());
        if mu == 0 || self.dim == 0 {
            return;
        }
        // renormalize when fewer than mu points are supplied
        let wsum: f64 = self.weights[..mu].iter().sum();
        let weights: Vec<f64> = self.weights[..mu].iter().map(|w| w / wsum).collect();
        let old = self.mean.clone();
        let ys: Vec<DVector<f64>> = sorted[..mu]
            .iter()
            .map(|x| (DVector::from_column_slice(x) - &old) / self.sigma)
            .collect();
        let y_w = ys.iter().zip(&weights).fold(DVector::zeros(self.dim), |acc, (y, w)| acc + y * *w);
        self.mean = &old + &y_w * self.sigma;

        let inv_sqrt = &self.basis
            * DMatrix::from_diagonal(&self.scales.map(|s| 1.0 / s))
            * self.basis.transpose();
        self.path_sigma = &self.path_sigma * (1.0 - self.c_sigma)
            + inv_sqrt * &y_w * (self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff).sqrt();

        self.generation += 1;
        let n = self.dim as f64;
        let ps_norm = self.path_sigma.norm();
        let decay = 1.0 - (1.0 - self.c_sigma).powi(2 * self.generation as i32);
        let h_sigma = ps_norm / decay.sqrt() / self.chi_n < 1.4 + 2.0 / (n + 1.0);
        let h = if h_sigma { 1.0 } else { 0.0 };

        self.path_c = &self.path_c * (1.0 - self.c_c)
            + &y_w * (h * (self.c_c * (2.0 - self.c_c) * self.mu_eff).sqrt());

        let rank_one = &self.path_c * self.path_c.transpose();
        let rank_mu = ys
            .iter()
            .zip(&weights)
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, (y, w)| acc + y * y.transpose() * *w);
        let correction = (1.0 - h) * self.c_c * (2.0 - self.c_c);
        self.cov = &self.cov * (1.0 - self.c_1 - self.c_mu)
            + (rank_one + &self.cov * correction) * self.c_1
            + rank_mu * self.c_mu;

        self.sigma *= ((self.c_sigma / self.damp_sigma) * (ps_norm / self.chi_n - 1.0)).exp();
        self.refresh_eigen();
    }

    fn refresh_eigen(&mut self) {
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let finite = eig.eigenvalues.iter().all(|v| v.is_finite()) && self.sigma.is_finite();
        if !finite || self.sigma <= 1e-300 {
            // numerical breakdown: restart the shape around the current mean
            self.cov = DMatrix::identity(self.dim, self.dim);
            self.basis = DMatrix::identity(self.dim, self.dim);
            self.scales = DVector::from_element(self.dim, 1.0);
            self.path_c.fill(0.0);
            self.path_sigma.fill(0.0);
            self.sigma = self.initial_sigma;
            return;
        }
        let vals = eig.eigenvalues.map(|v| v.max(1e-20));
        self.cov = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        self.scales = vals.map(f64::sqrt);
        self.basis = eig.eigenvectors;
    }
}
