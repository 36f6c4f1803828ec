use rand::Rng;

use super::{param, Domain, Genome, ParamMap, Solution, SolverRng};
use crate::catalog::Component;

pub(super) fn discrete(
    component: Component,
    parents: &[Solution],
    params: &ParamMap,
    domain: &Domain,
    rng: &mut SolverRng,
) -> Vec<Solution> {
    let Domain::Discrete { cardinalities } = domain else { unreachable!("checked encoding") };
    parents
        .iter()
        .map(|p| {
            let mut x = p.genome.as_int().expect("checked encoding").to_vec();
            match component {
                Component::SearchResetOne => reset_one(&mut x, cardinalities, rng),
                Component::SearchResetRand => {
                    let rate = param(component, params, "rate");
                    for (v, &c) in x.iter_mut().zip(cardinalities) {
                        if rng.random::<f64>() < rate {
                            *v = rng.random_range(0..c.max(1));
                        }
                    }
                }
                Component::SearchResetCreep => {
                    let rate = param(component, params, "rate");
                    let step = (param(component, params, "step") as usize).max(1);
                    for (v, &c) in x.iter_mut().zip(cardinalities) {
                        if rng.random::<f64>() < rate {
                            let delta = rng.random_range(1..=step);
                            *v = if rng.random::<bool>() {
                                (*v + delta).min(c.saturating_sub(1))
                            } else {
                                v.saturating_sub(delta)
                            };
                        }
                    }
                }
                Component::ReinitDiscrete => {
                    for (v, &c) in x.iter_mut().zip(cardinalities) {
                        *v = rng.random_range(0..c.max(1));
                    }
                }
                _ => unreachable!("dispatch"),
            }
            Solution::derived(Genome::Int(x), p)
        })
        .collect()
}

/// Sets one entity to a different value. Entities with a single admissible
/// value cannot change and are skipped.
fn reset_one(x: &mut [usize], cardinalities: &[usize], rng: &mut SolverRng) {
    let mutable: Vec<usize> = (0..x.len()).filter(|&i| cardinalities[i] > 1).collect();
    if mutable.is_empty() {
        return;
    }
    let i = mutable[rng.random_range(0..mutable.len())];
    let v = rng.random_range(0..cardinalities[i] - 1);
    x[i] = if v >= x[i] { v + 1 } else { v };
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{search, VertexState};
    use super::*;

    fn hamming(a: &Genome, b: &Genome) -> usize {
        a.as_int().unwrap().iter().zip(b.as_int().unwrap()).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn reset_rand_rate_zero_is_identity() {
        let d = Domain::discrete(30, 4);
        let mut r = rng(2);
        let pop = random_pop(&d, 10, &mut r);
        let params = ParamMap::from([("rate".into(), 0.0)]);
        let off = search(Component::SearchResetRand, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
        assert!(off.iter().zip(&pop).all(|(o, p)| o.genome == p.genome));
    }

    #[test]
    fn reset_one_changes_exactly_one_entity() {
        for (len, card) in [(1, 2), (7, 2), (20, 5)] {
            let d = Domain::discrete(len, card);
            let mut r = rng(len as u64);
            let pop = random_pop(&d, 200, &mut r);
            let off = search(Component::SearchResetOne, &pop, &ParamMap::new(), &d, &mut r, &mut VertexState::Empty).unwrap();
            for (o, p) in off.iter().zip(&pop) {
                assert_eq!(hamming(&o.genome, &p.genome), 1);
                assert!(d.contains(&o.genome));
            }
        }
    }

    #[test]
    fn reset_rand_changes_expected_count() {
        // binomial oracle: E[changed] = L * rate * (v - 1) / v
        let (len, card, rate, trials) = (100, 4, 0.1342, 10_000);
        let d = Domain::discrete(len, card);
        let mut r = rng(77);
        let pop = random_pop(&d, trials, &mut r);
        let params = ParamMap::from([("rate".into(), rate)]);
        let off = search(Component::SearchResetRand, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
        let mean = off.iter().zip(&pop).map(|(o, p)| hamming(&o.genome, &p.genome)).sum::<usize>() as f64
            / trials as f64;
        let expected = len as f64 * rate * (card - 1) as f64 / card as f64;
        assert!((mean - expected).abs() / expected < 0.05, "{mean} vs {expected}");
    }

    #[test]
    fn creep_clamps_to_cardinality() {
        let d = Domain::discrete(50, 3);
        let mut r = rng(5);
        let pop = random_pop(&d, 100, &mut r);
        let params = ParamMap::from([("rate".into(), 1.0), ("step".into(), 3.0)]);
        let off = search(Component::SearchResetCreep, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
        assert!(off.iter().all(|o| d.contains(&o.genome)));
    }
}
