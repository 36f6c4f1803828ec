//! Discrete RIS phase-shift optimization for multi-user downlink sum rate.
//!
//! The genome is the phase index vector `tau` with `tau[n]` in `0..2^b`,
//! mapped to `theta_n = exp(j * 2 pi tau[n] / 2^b)`. Given the phases, the
//! base station uses maximum-ratio transmission with an equal power split,
//! `w_k = sqrt(P_T / K) * h_k / |h_k|` where `h_k` is user `k`'s effective
//! channel. Fitness is the reciprocal of the sum rate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_genome, Problem, ProblemError};
use crate::components::{Domain, Genome};
use crate::seed::derive_seed;

/// Fitness reported when the sum rate is zero.
pub const RATE_ZERO_FITNESS: f64 = 1e18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamformingParams {
    pub antennas: usize,
    pub users: usize,
    pub bits: u32,
    pub power: f64,
    pub noise: f64,
}

impl Default for BeamformingParams {
    fn default() -> Self {
        Self { antennas: 4, users: 4, bits: 2, power: 1.0, noise: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingInstance {
    pub params: BeamformingParams,
    /// `h_d[k]`: base station to user `k`, length M.
    pub h_d: Vec<Vec<Complex64>>,
    /// `g[n]`: row `n` of the N x M base-station-to-RIS channel.
    pub g: Vec<Vec<Complex64>>,
    /// `h_r[k]`: RIS to user `k`, length N.
    pub h_r: Vec<Vec<Complex64>>,
    pub channel_seed: u64,
    domain: Domain,
}

fn cn01(rng: &mut ChaCha8Rng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
}

impl BeamformingInstance {
    pub fn from_channels(
        params: BeamformingParams,
        h_d: Vec<Vec<Complex64>>,
        g: Vec<Vec<Complex64>>,
        h_r: Vec<Vec<Complex64>>,
    ) -> Self {
        let n = g.len();
        let domain = Domain::discrete(n, 1usize << params.bits);
        Self { params, h_d, g, h_r, channel_seed: 0, domain }
    }

    /// Channels with i.i.d. `CN(0, 1)` entries.
    pub fn random(params: BeamformingParams, elements: usize, channel_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(channel_seed);
        let (m, k) = (params.antennas, params.users);
        let h_d = (0..k).map(|_| (0..m).map(|_| cn01(&mut rng)).collect()).collect();
        let g = (0..elements).map(|_| (0..m).map(|_| cn01(&mut rng)).collect()).collect();
        let h_r = (0..k).map(|_| (0..elements).map(|_| cn01(&mut rng)).collect()).collect();
        Self { channel_seed, ..Self::from_channels(params, h_d, g, h_r) }
    }

    pub fn elements(&self) -> usize {
        self.g.len()
    }

    pub fn codebook_size(&self) -> usize {
        1usize << self.params.bits
    }

    /// Effective channel rows `h_d,k^H + h_r,k^H Theta G`.
    fn effective_rows(&self, tau: &[usize]) -> Result<Vec<Vec<Complex64>>, ProblemError> {
        let levels = self.codebook_size();
        if tau.len() != self.elements() {
            return Err(ProblemError::LengthMismatch { expected: self.elements(), got: tau.len() });
        }
        let step = 2.0 * std::f64::consts::PI / levels as f64;
        let mut theta = Vec::with_capacity(tau.len());
        for (index, &value) in tau.iter().enumerate() {
            if value >= levels {
                return Err(ProblemError::IndexOutOfRange { index, value, limit: levels });
            }
            theta.push(Complex64::from_polar(1.0, step * value as f64));
        }
        Ok(self
            .h_d
            .iter()
            .zip(&self.h_r)
            .map(|(hd, hr)| {
                let mut row: Vec<Complex64> = hd.iter().map(|h| h.conj()).collect();
                for ((r, t), g_row) in hr.iter().zip(&theta).zip(&self.g) {
                    let c = r.conj() * t;
                    for (acc, gv) in row.iter_mut().zip(g_row) {
                        *acc += c * gv;
                    }
                }
                row
            })
            .collect())
    }

    /// Transmit beamformers for the given phases.
    pub fn beamformers(&self, tau: &[usize]) -> Result<Vec<Vec<Complex64>>, ProblemError> {
        let rows = self.effective_rows(tau)?;
        Ok(mrt(&rows, self.params.power))
    }

    pub fn sum_rate(&self, tau: &[usize]) -> Result<f64, ProblemError> {
        let rows = self.effective_rows(tau)?;
        let w = mrt(&rows, self.params.power);
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        Ok((0..rows.len())
            .map(|k| {
                let signal = dot(&rows[k], &w[k]).norm_sqr();
                let interference: f64 =
                    (0..rows.len()).filter(|&j| j != k).map(|j| dot(&rows[k], &w[j]).norm_sqr()).sum();
                (1.0 + signal / (interference + self.params.noise)).log2()
            })
            .sum())
    }

    pub fn fitness(&self, tau: &[usize]) -> Result<f64, ProblemError> {
        Ok(rate_to_fitness(self.sum_rate(tau)?))
    }
}

fn mrt(rows: &[Vec<Complex64>], power: f64) -> Vec<Vec<Complex64>> {
    let scale = (power / rows.len() as f64).sqrt();
    rows.iter()
        .map(|row| {
            let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                vec![Complex64::new(0.0, 0.0); row.len()]
            } else {
                row.iter().map(|c| c.conj() * (scale / norm)).collect()
            }
        })
        .collect()
}

pub(crate) fn rate_to_fitness(rate: f64) -> f64 {
    if rate > 0.0 {
        1.0 / rate
    } else {
        RATE_ZERO_FITNESS
    }
}

impl Problem for BeamformingInstance {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&self, genome: &Genome) -> Result<(f64, f64), ProblemError> {
        check_genome(&self.domain, genome)?;
        Ok((self.fitness(genome.as_int().expect("shape checked"))?, 0.0))
    }
}

/// One instance per entry of `elements`, each with its own channel seed.
pub fn make_beamforming_instances(
    params: BeamformingParams,
    elements: &[usize],
    master_seed: u64,
) -> Vec<BeamformingInstance> {
    elements
        .iter()
        .enumerate()
        .map(|(i, &n)| BeamformingInstance::random(params, n, derive_seed(master_seed, &[i as u64])))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialResult {
    pub tau: Vec<usize>,
    pub fitness: f64,
    pub rate_calls: usize,
}

/// Single pass of coordinate-wise enumeration from a random start.
pub fn sequential_beamforming(inst: &BeamformingInstance, seed: u64) -> Result<SequentialResult, ProblemError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = inst.codebook_size();
    let mut tau: Vec<usize> = (0..inst.elements()).map(|_| rng.random_range(0..levels)).collect();
    let mut calls = 0;
    let mut best_rate = f64::NEG_INFINITY;
    for n in 0..tau.len() {
        let mut best = (f64::NEG_INFINITY, tau[n]);
        for v in 0..levels {
            tau[n] = v;
            let r = inst.sum_rate(&tau)?;
            calls += 1;
            if r > best.0 {
                best = (r, v);
            }
        }
        tau[n] = best.1;
        best_rate = best.0;
    }
    let fitness = if tau.is_empty() { inst.fitness(&tau)? } else { rate_to_fitness(best_rate) };
    Ok(SequentialResult { tau, fitness, rate_calls: calls })
}
