use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_genome, Problem, ProblemError};
use crate::components::{Domain, Genome};

#[derive(Debug, Clone, PartialEq)]
pub enum BenchmarkKind {
    Sphere,
    Rastrigin,
    Rosenbrock,
    /// Counts genes that differ from `mask`; an all-false mask counts ones.
    OneMax { mask: Vec<bool> },
    Knapsack { weights: Vec<f64>, values: Vec<f64>, capacity: f64 },
    Tsp { distances: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub kind: BenchmarkKind,
    domain: Domain,
}

impl Benchmark {
    pub fn sphere(dim: usize) -> Self {
        Self { kind: BenchmarkKind::Sphere, domain: Domain::continuous(dim, -5.0, 5.0) }
    }

    pub fn rastrigin(dim: usize) -> Self {
        Self { kind: BenchmarkKind::Rastrigin, domain: Domain::continuous(dim, -5.12, 5.12) }
    }

    pub fn rosenbrock(dim: usize) -> Self {
        Self { kind: BenchmarkKind::Rosenbrock, domain: Domain::continuous(dim, -5.0, 10.0) }
    }

    pub fn onemax(dim: usize) -> Self {
        Self::onemax_masked(vec![false; dim])
    }

    /// OneMax relative to a seeded random target string.
    pub fn onemax_seeded(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::onemax_masked((0..dim).map(|_| rng.random()).collect())
    }

    pub fn onemax_masked(mask: Vec<bool>) -> Self {
        let domain = Domain::discrete(mask.len(), 2);
        Self { kind: BenchmarkKind::OneMax { mask }, domain }
    }

    pub fn knapsack(weights: Vec<f64>, values: Vec<f64>, capacity: f64) -> Self {
        let domain = Domain::discrete(weights.len(), 2);
        Self { kind: BenchmarkKind::Knapsack { weights, values, capacity }, domain }
    }

    /// Uniform weights and values in `[1, 10)`, capacity half the total weight.
    pub fn knapsack_random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let values = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let capacity = weights.iter().sum::<f64>() / 2.0;
        Self::knapsack(weights, values, capacity)
    }

    pub fn tsp(distances: Vec<Vec<f64>>) -> Self {
        let domain = Domain::Permutation { len: distances.len() };
        Self { kind: BenchmarkKind::Tsp { distances }, domain }
    }

    pub fn tsp_from_coords(coords: &[(f64, f64)]) -> Self {
        let d = coords
            .iter()
            .map(|a| coords.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect();
        Self::tsp(d)
    }

    /// Cities uniform in the unit square.
    pub fn tsp_random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
        Self::tsp_from_coords(&coords)
    }
}

impl Problem for Benchmark {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&self, genome: &Genome) -> Result<(f64, f64), ProblemError> {
        check_genome(&self.domain, genome)?;
        if !self.domain.contains(genome) {
            if let Genome::Int(x) | Genome::Perm(x) = genome {
                let limit = match &self.domain {
                    Domain::Discrete { cardinalities } => cardinalities[0],
                    _ => x.len(),
                };
                let (index, &value) = x.iter().enumerate().find(|(_, &v)| v >= limit).unwrap_or((0, &x[0]));
                return Err(ProblemError::IndexOutOfRange { index, value, limit });
            }
        }
        Ok(match (&self.kind, genome) {
            (BenchmarkKind::Sphere, Genome::Real(x)) => (x.iter().map(|v| v * v).sum(), 0.0),
            (BenchmarkKind::Rastrigin, Genome::Real(x)) => {
                let s: f64 = x.iter().map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos()).sum();
                (10.0 * x.len() as f64 + s, 0.0)
            }
            (BenchmarkKind::Rosenbrock, Genome::Real(x)) => {
                let s = x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum();
                (s, 0.0)
            }
            (BenchmarkKind::OneMax { mask }, Genome::Int(x)) => {
                let ones = x.iter().zip(mask).filter(|(&v, &m)| (v == 1) != m).count();
                (-(ones as f64), 0.0)
            }
            (BenchmarkKind::Knapsack { weights, values, capacity }, Genome::Int(x)) => {
                let (mut w, mut v) = (0.0, 0.0);
                for i in (0..x.len()).filter(|&i| x[i] == 1) {
                    w += weights[i];
                    v += values[i];
                }
                (-v, (w - capacity).max(0.0))
            }
            (BenchmarkKind::Tsp { distances }, Genome::Perm(p)) => {
                let n = p.len();
                let len = (0..n).map(|i| distances[p[i]][p[(i + 1) % n]]).sum();
                (len, 0.0)
            }
            _ => unreachable!("shape checked"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_optimum() {
        assert_eq!(Benchmark::sphere(4).evaluate(&Genome::Real(vec![0.0; 4])), Ok((0.0, 0.0)));
    }

    #[test]
    fn onemax_counts_ones() {
        assert_eq!(Benchmark::onemax(20).evaluate(&Genome::Int(vec![1; 20])), Ok((-20.0, 0.0)));
        let masked = Benchmark::onemax_masked(vec![true, false]);
        assert_eq!(masked.evaluate(&Genome::Int(vec![0, 1])), Ok((-2.0, 0.0)));
    }

    #[test]
    fn tsp_unit_square_perimeter() {
        let t = Benchmark::tsp_from_coords(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        assert_eq!(t.evaluate(&Genome::Perm(vec![0, 1, 2, 3])), Ok((4.0, 0.0)));
    }

    #[test]
    fn knapsack_overweight_is_violation() {
        let k = Benchmark::knapsack(vec![3.0, 4.0], vec![5.0, 6.0], 5.0);
        assert_eq!(k.evaluate(&Genome::Int(vec![1, 1])), Ok((-11.0, 2.0)));
        assert_eq!(k.evaluate(&Genome::Int(vec![0, 1])), Ok((-6.0, 0.0)));
    }

    #[test]
    fn rastrigin_and_rosenbrock_optima() {
        assert!(Benchmark::rastrigin(3).evaluate(&Genome::Real(vec![0.0; 3])).unwrap().0.abs() < 1e-12);
        assert_eq!(Benchmark::rosenbrock(3).evaluate(&Genome::Real(vec![1.0; 3])), Ok((0.0, 0.0)));
    }

    #[test]
    fn wrong_encoding_is_rejected() {
        let err = Benchmark::sphere(2).evaluate(&Genome::Int(vec![0, 1]));
        assert!(matches!(err, Err(ProblemError::EncodingMismatch { .. })));
    }
}
