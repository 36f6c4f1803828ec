//! Hyperparameter tuning of a fixed graph with CMA-ES.

use rand::Rng;

use crate::cmaes::CmaEs;
use crate::graph::{AlgorithmGraph, VertexId};
use crate::space::DesignSpace;

pub const TUNING_SIGMA: f64 = 0.3;

/// `ceil(4 + 3 ln d)`.
pub fn tuning_lambda(dim: usize) -> usize {
    (4.0 + 3.0 * (dim.max(1) as f64).ln()).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    pub graph: AlgorithmGraph,
    /// Objective of `graph`; `None` when nothing was evaluated.
    pub score: Option<f64>,
    pub evaluations: usize,
}

fn decode(graph: &AlgorithmGraph, space: &DesignSpace, slots: &[(VertexId, String)], x: &[f64]) -> AlgorithmGraph {
    let mut g = graph.clone();
    for ((id, name), &t) in slots.iter().zip(x) {
        let v = g.vertex_mut(*id).expect("slot vertex");
        let schema = v.component.param(name).expect("slot param");
        let (lo, hi) = space.param_range(v.component, name);
        v.params.insert(name.clone(), schema.denormalize(t, lo, hi));
    }
    g
}

/// Minimizes `objective` over the tunable parameters of `graph`, spending
/// at most `budget` objective calls. Parameters are searched in `[0, 1]`
/// coordinates and rounded at decode for integer kinds.
pub fn tune_hyperparams<R: Rng, E>(
    graph: &AlgorithmGraph,
    space: &DesignSpace,
    budget: usize,
    rng: &mut R,
    mut objective: impl FnMut(&AlgorithmGraph) -> Result<f64, E>,
) -> Result<Tuned, E> {
    let slots = space.tunable_slots(graph);
    let mut best = Tuned { graph: graph.clone(), score: None, evaluations: 0 };
    if slots.is_empty() || budget == 0 {
        return Ok(best);
    }
    let x0: Vec<f64> = slots
        .iter()
        .map(|(id, name)| {
            let v = graph.vertex(*id).unwrap();
            let (lo, hi) = space.param_range(v.component, name);
            v.component.param(name).unwrap().normalize(v.param(name), lo, hi)
        })
        .collect();
    let lambda = tuning_lambda(slots.len());
    let mut es = CmaEs::new(x0, TUNING_SIGMA, lambda);
    while best.evaluations < budget {
        let count = lambda.min(budget - best.evaluations);
        let mut scored = Vec::with_capacity(count);
        for x in es.ask(count, rng) {
            let clipped: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let g = decode(graph, space, &slots, &clipped);
            let f = objective(&g)?;
            best.evaluations += 1;
            if best.score.is_none_or(|b| f < b) {
                best.score = Some(f);
                best.graph = g;
            }
            scored.push((f, clipped));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        es.tell(&scored.into_iter().map(|s| s.1).collect::<Vec<_>>());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Encoding;
    use crate::presets;
    use crate::space::build_default_space;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;
    use std::convert::Infallible;

    #[test]
    fn quadratic_bowl_on_rate() {
        let fixed = presets::stacking_designed();
        let space = build_default_space(Encoding::Discrete)
            .with_fixed_topology(fixed.clone(), Some(BTreeSet::from([(2, "rate".to_string())])));
        for seed in 0..20 {
            let mut calls = 0;
            let t = tune_hyperparams(&fixed, &space, 60, &mut ChaCha8Rng::seed_from_u64(seed), |g| {
                calls += 1;
                Ok::<_, Infallible>((g.vertex(2).unwrap().param("rate") - 0.25).powi(2))
            })
            .unwrap();
            let rate = t.graph.vertex(2).unwrap().param("rate");
            assert!((rate - 0.25).abs() < 0.05, "seed {seed}: {rate}");
            assert_eq!(t.evaluations, 60);
            assert_eq!(calls, 60);
        }
    }

    #[test]
    fn no_tunable_params_is_a_no_op() {
        let g = presets::make_baseline("RS", Encoding::Discrete).unwrap();
        let space = build_default_space(Encoding::Discrete);
        let t = tune_hyperparams(&g, &space, 20, &mut ChaCha8Rng::seed_from_u64(0), |_| -> Result<f64, Infallible> {
            panic!("not called")
        })
        .unwrap();
        assert_eq!(t.graph, g);
        assert_eq!(t.evaluations, 0);
    }

    #[test]
    fn budget_not_multiple_of_lambda() {
        let g = presets::ris_designed();
        let space = build_default_space(Encoding::Discrete);
        let t = tune_hyperparams(&g, &space, 7, &mut ChaCha8Rng::seed_from_u64(1), |g| {
            Ok::<_, Infallible>(g.vertex(1).unwrap().param("rate"))
        })
        .unwrap();
        assert_eq!(t.evaluations, 7);
        assert!(space.tunable_slots(&t.graph).len() >= 1);
    }

    #[test]
    fn lambda_values() {
        assert_eq!(tuning_lambda(1), 4);
        assert_eq!(tuning_lambda(2), 7);
        assert_eq!(tuning_lambda(10), 11);
    }
}
