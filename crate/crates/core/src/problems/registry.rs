use serde::{Deserialize, Serialize};

use super::{Benchmark, BeamformingInstance, BeamformingParams, InstanceRole, ProblemError, ProblemInstance};
use crate::seed::derive_seed;

pub const PROBLEM_NAMES: &[&str] = &["sphere", "rastrigin", "rosenbrock", "onemax", "knapsack", "tsp", "beamforming"];

/// Factory settings shared by all built-in problems. Fields a problem does
/// not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub name: String,
    /// Genome length for benchmarks.
    pub dim: usize,
    /// RIS element counts; instance `i` uses entry `i mod len`.
    pub elements: Vec<usize>,
    pub beamforming: BeamformingParams,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self { name: String::new(), dim: 20, elements: vec![32], beamforming: BeamformingParams::default() }
    }
}

/// Builds `count` seeded instances. Training and test instances draw from
/// separate seed streams, so the two sets never coincide.
pub fn build_instances(
    config: &ProblemConfig,
    role: InstanceRole,
    count: usize,
    master_seed: u64,
) -> Result<Vec<ProblemInstance>, ProblemError> {
    if !PROBLEM_NAMES.contains(&config.name.as_str()) {
        return Err(ProblemError::UnknownProblem(config.name.clone()));
    }
    if config.dim == 0 && config.name != "beamforming" {
        return Err(ProblemError::Config("dim must be positive".into()));
    }
    if config.name == "beamforming" && (config.elements.is_empty() || config.elements.contains(&0)) {
        return Err(ProblemError::Config("elements must be a non-empty list of positive counts".into()));
    }
    let tag = match role {
        InstanceRole::Training => 0,
        InstanceRole::Test => 1,
    };
    (0..count)
        .map(|i| {
            let seed = derive_seed(master_seed, &[tag, i as u64]);
            let id = format!("{}-{}-{}", config.name, if tag == 0 { "train" } else { "test" }, i);
            let d = config.dim;
            let inst = match config.name.as_str() {
                "sphere" => ProblemInstance::new(id, role, Benchmark::sphere(d)),
                "rastrigin" => ProblemInstance::new(id, role, Benchmark::rastrigin(d)),
                "rosenbrock" => ProblemInstance::new(id, role, Benchmark::rosenbrock(d)),
                "onemax" => ProblemInstance::new(id, role, Benchmark::onemax_seeded(d, seed)),
                "knapsack" => ProblemInstance::new(id, role, Benchmark::knapsack_random(d, seed)),
                "tsp" => ProblemInstance::new(id, role, Benchmark::tsp_random(d, seed)),
                _ => {
                    let n = config.elements[i % config.elements.len()];
                    ProblemInstance::new(id, role, BeamformingInstance::random(config.beamforming, n, seed))
                }
            };
            Ok(inst)
        })
        .collect()
}
