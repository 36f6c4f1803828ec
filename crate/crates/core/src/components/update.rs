use rand::seq::index::sample;
use rand::Rng;

use super::{better, param, ComponentError, ParamMap, Solution, SolverRng};
use crate::catalog::{Component, Role};

const SA_COOLING: f64 = 0.99;

/// Temperature after `iteration` geometric cooling steps.
pub fn sa_temperature(t0: f64, iteration: usize) -> f64 {
    t0 * SA_COOLING.powi(iteration as i32)
}

/// Merges the current population `old` with the offspring `new` into the
/// next population of the same size.
pub fn update(
    component: Component,
    old: &[Solution],
    new: &[Solution],
    params: &ParamMap,
    iteration: usize,
    rng: &mut SolverRng,
) -> Result<Vec<Solution>, ComponentError> {
    if component.role() != Role::Update {
        return Err(ComponentError::WrongRole { component, role: component.role() });
    }
    if old.len() != new.len() {
        return Err(ComponentError::SizeMismatch { old: old.len(), new: new.len() });
    }
    let n = old.len();
    Ok(match component {
        Component::UpdateAlways => new.to_vec(),
        Component::UpdatePairwise => {
            old.iter().zip(new).map(|(o, c)| if c.fitness <= o.fitness { c.clone() } else { o.clone() }).collect()
        }
        Component::UpdateSimulatedAnnealing => {
            let t = sa_temperature(param(component, params, "t0"), iteration);
            old.iter()
                .zip(new)
                .map(|(o, c)| {
                    let accept = c.fitness <= o.fitness || rng.random::<f64>() < (-(c.fitness - o.fitness) / t).exp();
                    if accept { c.clone() } else { o.clone() }
                })
                .collect()
        }
        Component::UpdateGreedy => {
            let pool: Vec<&Solution> = old.iter().chain(new).collect();
            let mut order: Vec<usize> = (0..pool.len()).collect();
            order.sort_by(|&a, &b| better((a, pool[a].fitness), (b, pool[b].fitness)));
            order[..n].iter().map(|&i| pool[i].clone()).collect()
        }
        Component::UpdateRoundRobin => {
            let pool: Vec<&Solution> = old.iter().chain(new).collect();
            let m = pool.len();
            let q = (param(component, params, "q") as usize).min(m.saturating_sub(1));
            let wins: Vec<usize> = (0..m)
                .map(|i| {
                    sample(rng, m - 1, q)
                        .into_iter()
                        .map(|j| if j >= i { j + 1 } else { j })
                        .filter(|&j| pool[i].fitness <= pool[j].fitness)
                        .count()
                })
                .collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| wins[b].cmp(&wins[a]).then(better((a, pool[a].fitness), (b, pool[b].fitness))));
            order[..n].iter().map(|&i| pool[i].clone()).collect()
        }
        _ => unreachable!("role checked"),
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::Genome;
    use super::*;

    fn pop(fit: &[f64]) -> Vec<Solution> {
        fit.iter().map(|&f| Solution::with_fitness(Genome::Real(vec![f]), f)).collect()
    }

    fn fits(p: &[Solution]) -> Vec<f64> {
        p.iter().map(|s| s.fitness).collect()
    }

    #[test]
    fn always_takes_offspring() {
        let (o, n) = (pop(&[1.0, 2.0]), pop(&[5.0, 6.0]));
        assert_eq!(update(Component::UpdateAlways, &o, &n, &ParamMap::new(), 0, &mut rng(0)).unwrap(), n);
    }

    #[test]
    fn greedy_keeps_best_of_union() {
        let out = update(Component::UpdateGreedy, &pop(&[1.0, 3.0]), &pop(&[2.0, 0.5]), &ParamMap::new(), 0, &mut rng(0)).unwrap();
        assert_eq!(fits(&out), [0.5, 1.0]);
    }

    #[test]
    fn pairwise_keeps_better_of_each_pair() {
        let out = update(Component::UpdatePairwise, &pop(&[1.0, 3.0]), &pop(&[2.0, 0.5]), &ParamMap::new(), 0, &mut rng(0)).unwrap();
        assert_eq!(fits(&out), [1.0, 0.5]);
    }

    #[test]
    fn cold_annealing_matches_pairwise() {
        let mut r = rng(12);
        let old: Vec<f64> = (0..1000).map(|_| r.random()).collect();
        let new: Vec<f64> = (0..1000).map(|_| r.random()).collect();
        let params = ParamMap::from([("t0".into(), 1e-300)]);
        let sa = update(Component::UpdateSimulatedAnnealing, &pop(&old), &pop(&new), &params, 0, &mut r).unwrap();
        let pw = update(Component::UpdatePairwise, &pop(&old), &pop(&new), &ParamMap::new(), 0, &mut r).unwrap();
        assert_eq!(sa, pw);
    }

    #[test]
    fn temperature_cools_geometrically() {
        assert_eq!(sa_temperature(2.0, 0), 2.0);
        assert!((sa_temperature(1.0, 100) - 0.99f64.powi(100)).abs() < 1e-15);
    }

    #[test]
    fn full_round_robin_is_a_sort() {
        // every member meets all others, so wins order equals fitness order
        let params = ParamMap::from([("q".into(), 10.0)]);
        let out = update(Component::UpdateRoundRobin, &pop(&[4.0, 2.0, 6.0]), &pop(&[1.0, 5.0, 3.0]), &params, 0, &mut rng(1)).unwrap();
        assert_eq!(fits(&out), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn size_mismatch_errors() {
        let err = update(Component::UpdateGreedy, &pop(&[1.0]), &pop(&[1.0, 2.0]), &ParamMap::new(), 0, &mut rng(0));
        assert_eq!(err, Err(ComponentError::SizeMismatch { old: 1, new: 2 }));
    }
}
