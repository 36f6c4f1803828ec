//! Implementations of every catalog component as seeded transformations of a
//! population. Components never evaluate solutions; offspring inherit the
//! fitness of the parent they were derived from until the executor
//! evaluates them.

mod archive;
mod choose;
mod crossover;
mod discrete;
mod model;
mod mutate;
mod permutation;
mod update;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{Component, Encoding, Role};

pub use archive::{archive, genome_key, ArchiveState};
pub use choose::choose;
pub use crossover::{one_point_at, SbxPair};
pub use model::{CmaState, PsoState};
pub use update::{sa_temperature, update};

pub type SolverRng = ChaCha8Rng;
pub type ParamMap = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub enum Genome {
    Real(Vec<f64>),
    Int(Vec<usize>),
    Perm(Vec<usize>),
}

impl Genome {
    pub fn len(&self) -> usize {
        match self {
            Genome::Real(x) => x.len(),
            Genome::Int(x) | Genome::Perm(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encoding(&self) -> Encoding {
        match self {
            Genome::Real(_) => Encoding::Continuous,
            Genome::Int(_) => Encoding::Discrete,
            Genome::Perm(_) => Encoding::Permutation,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Genome::Real(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&[usize]> {
        match self {
            Genome::Int(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_perm(&self) -> Option<&[usize]> {
        match self {
            Genome::Perm(x) => Some(x),
            _ => None,
        }
    }

    /// Genome as a real vector, for clustering.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Genome::Real(x) => x.clone(),
            Genome::Int(x) | Genome::Perm(x) => x.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Euclidean distance for real and integer genomes, Hamming distance for
    /// permutations.
    pub fn distance(&self, other: &Genome) -> f64 {
        match (self, other) {
            (Genome::Real(a), Genome::Real(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            (Genome::Int(a), Genome::Int(b)) => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let d = x as f64 - y as f64;
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            (Genome::Perm(a), Genome::Perm(b)) => a.iter().zip(b).filter(|(x, y)| x != y).count() as f64,
            _ => f64::INFINITY,
        }
    }
}

/// Search domain of a problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Continuous { lower: Vec<f64>, upper: Vec<f64> },
    Discrete { cardinalities: Vec<usize> },
    Permutation { len: usize },
}

impl Domain {
    pub fn continuous(dim: usize, lower: f64, upper: f64) -> Self {
        Domain::Continuous { lower: vec![lower; dim], upper: vec![upper; dim] }
    }

    pub fn discrete(dim: usize, cardinality: usize) -> Self {
        Domain::Discrete { cardinalities: vec![cardinality; dim] }
    }

    pub fn encoding(&self) -> Encoding {
        match self {
            Domain::Continuous { .. } => Encoding::Continuous,
            Domain::Discrete { .. } => Encoding::Discrete,
            Domain::Permutation { .. } => Encoding::Permutation,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Continuous { lower, .. } => lower.len(),
            Domain::Discrete { cardinalities } => cardinalities.len(),
            Domain::Permutation { len } => *len,
        }
    }

    pub fn random_genome(&self, rng: &mut SolverRng) -> Genome {
        match self {
            Domain::Continuous { lower, upper } => Genome::Real(
                lower.iter().zip(upper).map(|(&l, &u)| l + rng.random::<f64>() * (u - l)).collect(),
            ),
            Domain::Discrete { cardinalities } => {
                Genome::Int(cardinalities.iter().map(|&c| rng.random_range(0..c.max(1))).collect())
            }
            Domain::Permutation { len } => {
                use rand::seq::SliceRandom;
                let mut p: Vec<usize> = (0..*len).collect();
                p.shuffle(rng);
                Genome::Perm(p)
            }
        }
    }

    /// Whether `g` satisfies this domain's bounds, cardinalities or bijection.
    pub fn contains(&self, g: &Genome) -> bool {
        match (self, g) {
            (Domain::Continuous { lower, upper }, Genome::Real(x)) => {
                x.len() == lower.len()
                    && x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| v >= l && v <= u)
            }
            (Domain::Discrete { cardinalities }, Genome::Int(x)) => {
                x.len() == cardinalities.len() && x.iter().zip(cardinalities).all(|(v, c)| v < c)
            }
            (Domain::Permutation { len }, Genome::Perm(p)) => {
                if p.len() != *len {
                    return false;
                }
                let mut seen = vec![false; *len];
                p.iter().all(|&v| v < *len && !std::mem::replace(&mut seen[v], true))
            }
            _ => false,
        }
    }

    fn real_bounds(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Domain::Continuous { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }

    fn clip_real(&self, x: &mut [f64]) {
        if let Some((lo, hi)) = self.real_bounds() {
            for ((v, &l), &u) in x.iter_mut().zip(lo).zip(hi) {
                *v = if v.is_nan() { l } else { v.clamp(l, u) };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub genome: Genome,
    /// Penalized fitness; lower is better.
    pub fitness: f64,
    pub raw_fitness: f64,
    pub violation: f64,
    /// False for offspring whose fitness is inherited from a parent.
    pub evaluated: bool,
    /// Iteration in which the solution was evaluated (0 = initialization).
    pub birth: usize,
}

impl Solution {
    pub fn new(genome: Genome, raw_fitness: f64, violation: f64, penalty: f64) -> Self {
        Self {
            genome,
            fitness: crate::problems::penalized_fitness(raw_fitness, violation, penalty),
            raw_fitness,
            violation,
            evaluated: true,
            birth: 0,
        }
    }

    /// An unevaluated solution carrying `parent`'s fitness.
    pub fn derived(genome: Genome, parent: &Solution) -> Self {
        Self { genome, evaluated: false, ..parent.clone() }
    }

    /// Solution with only a fitness value, for tests and synthetic inputs.
    pub fn with_fitness(genome: Genome, fitness: f64) -> Self {
        Self { genome, fitness, raw_fitness: fitness, violation: 0.0, evaluated: true, birth: 0 }
    }
}

/// Ordering used everywhere: lower fitness first, ties by index.
pub(crate) fn better(a: (usize, f64), b: (usize, f64)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComponentError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("{component} does not apply to {encoding} genomes")]
    EncodingMismatch { component: Component, encoding: Encoding },
    #[error("{component} needs an even number of parents, got {count}")]
    OddParentCount { component: Component, count: usize },
    #[error("{component} needs at least {need} parents, got {got}")]
    PopulationTooSmall { component: Component, need: usize, got: usize },
    #[error("update needs equally sized populations, got {old} and {new}")]
    SizeMismatch { old: usize, new: usize },
    #[error("{component} is a {role:?} component")]
    WrongRole { component: Component, role: Role },
}

/// Per-vertex state that persists across the iterations of one solve run.
#[derive(Debug, Clone, Default)]
pub enum VertexState {
    #[default]
    Empty,
    Cma(Box<CmaState>),
    Pso(PsoState),
}

pub(crate) fn param(component: Component, params: &ParamMap, name: &str) -> f64 {
    params.get(name).copied().unwrap_or_else(|| {
        component.param(name).map(|p| p.default).unwrap_or_else(|| panic!("{component}.{name}"))
    })
}

/// Applies a Search component to `parents`, returning one offspring per
/// parent.
pub fn search(
    component: Component,
    parents: &[Solution],
    params: &ParamMap,
    domain: &Domain,
    rng: &mut SolverRng,
    state: &mut VertexState,
) -> Result<Vec<Solution>, ComponentError> {
    if component.role() != Role::Search {
        return Err(ComponentError::WrongRole { component, role: component.role() });
    }
    if !component.supports(domain.encoding()) {
        return Err(ComponentError::EncodingMismatch { component, encoding: domain.encoding() });
    }
    if let Some(p) = parents.iter().find(|p| p.genome.encoding() != domain.encoding()) {
        return Err(ComponentError::EncodingMismatch { component, encoding: p.genome.encoding() });
    }
    if parents.is_empty() {
        return Err(ComponentError::EmptyPopulation);
    }
    use Component::*;
    match component {
        c if c.is_crossover() => crossover::crossover(c, parents, params, domain, rng),
        SearchMuGaussian | SearchMuCauchy | SearchMuPolynomial | SearchMuUniform
        | ReinitContinuous => Ok(mutate::mutate(component, parents, params, domain, rng)),
        SearchCma | SearchEda | SearchPso | SearchDeRandom | SearchDeCurrent
        | SearchDeCurrentBest => model::model_based(component, parents, params, domain, rng, state),
        SearchResetOne | SearchResetRand | SearchResetCreep | ReinitDiscrete => {
            Ok(discrete::discrete(component, parents, params, domain, rng))
        }
        _ => Ok(permutation::permutation(component, parents, rng)),
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::SeedableRng;

    pub fn rng(seed: u64) -> SolverRng {
        SolverRng::seed_from_u64(seed)
    }

    pub fn random_pop(domain: &Domain, n: usize, rng: &mut SolverRng) -> Vec<Solution> {
        (0..n)
            .map(|_| {
                let g = domain.random_genome(rng);
                let f = rng.random::<f64>();
                Solution::with_fitness(g, f)
            })
            .collect()
    }
}
