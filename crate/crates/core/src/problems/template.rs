//! Skeleton for a user-defined problem.
//!
//! ```
//! use metadesign::components::{Domain, Genome};
//! use metadesign::problems::{check_genome, Problem, ProblemError};
//!
//! /// Minimize the number of adjacent equal values, with at most
//! /// `budget` non-zero entries.
//! #[derive(Debug)]
//! struct Alternating {
//!     domain: Domain,
//!     budget: usize,
//! }
//!
//! impl Problem for Alternating {
//!     // Encoding, length and per-dimension bounds or cardinalities.
//!     fn domain(&self) -> &Domain {
//!         &self.domain
//!     }
//!
//!     // Return (raw_fitness, violation): lower raw fitness is better and
//!     // violation is zero exactly when the genome is feasible. Infeasible
//!     // genomes are ranked by raw + penalty() * violation.
//!     fn evaluate(&self, genome: &Genome) -> Result<(f64, f64), ProblemError> {
//!         check_genome(&self.domain, genome)?;
//!         let x = genome.as_int().unwrap();
//!         let equal = x.windows(2).filter(|w| w[0] == w[1]).count() as f64;
//!         let nonzero = x.iter().filter(|&&v| v != 0).count();
//!         Ok((equal, nonzero.saturating_sub(self.budget) as f64))
//!     }
//! }
//!
//! let p = Alternating { domain: Domain::discrete(4, 3), budget: 2 };
//! assert_eq!(p.evaluate(&Genome::Int(vec![1, 0, 2, 0])).unwrap(), (0.0, 0.0));
//! assert_eq!(p.evaluate(&Genome::Int(vec![1, 1, 2, 0])).unwrap(), (1.0, 1.0));
//! ```
