//! Problem plugin contract, penalty handling and built-in problems.
//!
//! A problem supplies its search [`Domain`] and an `evaluate` function that
//! maps a genome to `(raw_fitness, violation)`. Lower raw fitness is better
//! and `violation` is zero exactly for feasible genomes. See
//! [`template`] for a commented skeleton of a new problem.

mod beamforming;
mod benchmarks;
mod registry;
pub mod template;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::Encoding;
use crate::components::{Domain, Genome, Solution};

pub use beamforming::{
    make_beamforming_instances, sequential_beamforming, BeamformingInstance, BeamformingParams,
    SequentialResult, RATE_ZERO_FITNESS,
};
pub use benchmarks::{Benchmark, BenchmarkKind};
pub use registry::{build_instances, ProblemConfig, PROBLEM_NAMES};

pub const DEFAULT_PENALTY: f64 = 1e6;

/// `raw + coeff * violation`.
pub fn penalized_fitness(raw: f64, violation: f64, coeff: f64) -> f64 {
    if violation == 0.0 {
        raw
    } else {
        raw + coeff * violation
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("problem expects {expected} genomes, got {got}")]
    EncodingMismatch { expected: Encoding, got: Encoding },
    #[error("genome length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {index} = {value} outside 0..{limit}")]
    IndexOutOfRange { index: usize, value: usize, limit: usize },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid problem configuration: {0}")]
    Config(String),
}

pub trait Problem: Send + Sync + fmt::Debug {
    fn domain(&self) -> &Domain;

    /// `(raw_fitness, violation)`; deterministic for a fixed genome.
    fn evaluate(&self, genome: &Genome) -> Result<(f64, f64), ProblemError>;

    fn penalty(&self) -> f64 {
        DEFAULT_PENALTY
    }

    /// Evaluates and wraps the result as a solution.
    fn solution(&self, genome: Genome) -> Result<Solution, ProblemError> {
        let (raw, viol) = self.evaluate(&genome)?;
        Ok(Solution::new(genome, raw, viol, self.penalty()))
    }
}

/// Checks a genome's encoding and length against a domain.
pub fn check_genome(domain: &Domain, genome: &Genome) -> Result<(), ProblemError> {
    if genome.encoding() != domain.encoding() {
        return Err(ProblemError::EncodingMismatch { expected: domain.encoding(), got: genome.encoding() });
    }
    if genome.len() != domain.dim() {
        return Err(ProblemError::LengthMismatch { expected: domain.dim(), got: genome.len() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceRole {
    Training,
    Test,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub id: String,
    pub role: InstanceRole,
    pub problem: Arc<dyn Problem>,
}

impl ProblemInstance {
    pub fn new(id: impl Into<String>, role: InstanceRole, problem: impl Problem + 'static) -> Self {
        Self { id: id.into(), role, problem: Arc::new(problem) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn penalty_arithmetic() {
        assert_eq!(penalized_fitness(3.0, 0.0, 5.0), 3.0);
        assert_eq!(penalized_fitness(3.0, 2.0, 1e6), 2_000_003.0);
    }

    #[test]
    fn feasible_ranks_before_infeasible() {
        // raw values within half the smallest penalty of zero cannot overturn it
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let coeff = DEFAULT_PENALTY;
        for _ in 0..1000 {
            let min_viol = r.random_range(1e-6..10.0);
            let half = coeff * min_viol / 2.0;
            let (a, b) = (r.random_range(-half..half), r.random_range(-half..half));
            let viol = min_viol * r.random_range(1.0..5.0);
            assert!(penalized_fitness(a, 0.0, coeff) < penalized_fitness(b, viol, coeff));
        }
    }
}
