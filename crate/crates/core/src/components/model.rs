use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{better, param, ComponentError, Domain, Genome, ParamMap, Solution, SolverRng, VertexState};
use crate::catalog::Component;
use crate::cmaes::CmaEs;

const EDA_VARIANCE_FLOOR: f64 = 1e-12;

/// CMA-ES running in coordinates normalized to `[0, 1]` per dimension.
#[derive(Debug, Clone)]
pub struct CmaState {
    pub es: CmaEs,
}

/// Velocities and personal bests, one slot per population position.
#[derive(Debug, Clone, Default)]
pub struct PsoState {
    pub velocity: Vec<Vec<f64>>,
    pub personal_best: Vec<(Vec<f64>, f64)>,
}

pub(super) fn model_based(
    component: Component,
    parents: &[Solution],
    params: &ParamMap,
    domain: &Domain,
    rng: &mut SolverRng,
    state: &mut VertexState,
) -> Result<Vec<Solution>, ComponentError> {
    let Domain::Continuous { lower, upper } = domain else { unreachable!("checked encoding") };
    let xs: Vec<&[f64]> = parents.iter().map(|p| p.genome.as_real().expect("checked encoding")).collect();
    let mut out: Vec<Vec<f64>> = match component {
        Component::SearchCma => cma(parents, &xs, params, lower, upper, rng, state),
        Component::SearchEda => eda(parents, &xs, rng),
        Component::SearchPso => pso(parents, &xs, params, lower, upper, rng, state),
        _ => de(component, parents, &xs, params, rng)?,
    };
    for x in &mut out {
        domain.clip_real(x);
    }
    Ok(out.into_iter().zip(parents).map(|(x, p)| Solution::derived(Genome::Real(x), p)).collect())
}

fn ranked(parents: &[Solution]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..parents.len()).collect();
    order.sort_by(|&a, &b| better((a, parents[a].fitness), (b, parents[b].fitness)));
    order
}

fn cma(
    parents: &[Solution],
    xs: &[&[f64]],
    params: &ParamMap,
    lower: &[f64],
    upper: &[f64],
    rng: &mut SolverRng,
    state: &mut VertexState,
) -> Vec<Vec<f64>> {
    let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let to_unit = |x: &[f64]| -> Vec<f64> {
        x.iter().enumerate().map(|(d, v)| if width[d] > 0.0 { (v - lower[d]) / width[d] } else { 0.0 }).collect()
    };
    let n = parents.len();
    let fresh = !matches!(state, VertexState::Cma(s) if s.es.dim() == lower.len() && s.es.lambda() == n.max(2));
    if fresh {
        let dim = lower.len();
        let mut mean = vec![0.0; dim];
        for x in xs {
            for (m, v) in mean.iter_mut().zip(to_unit(x)) {
                *m += v / n as f64;
            }
        }
        let es = CmaEs::new(mean, param(Component::SearchCma, params, "sigma"), n);
        *state = VertexState::Cma(Box::new(CmaState { es }));
    }
    let VertexState::Cma(s) = state else { unreachable!() };
    if !fresh {
        let sorted: Vec<Vec<f64>> = ranked(parents).into_iter().map(|i| to_unit(xs[i])).collect();
        s.es.tell(&sorted);
    }
    s.es
        .ask(n, rng)
        .into_iter()
        .map(|u| u.iter().enumerate().map(|(d, t)| lower[d] + t * width[d]).collect())
        .collect()
}

fn eda(parents: &[Solution], xs: &[&[f64]], rng: &mut SolverRng) -> Vec<Vec<f64>> {
    let order = ranked(parents);
    let half = &order[..parents.len().div_ceil(2)];
    let dim = xs[0].len();
    let k = half.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|d| half.iter().map(|&i| xs[i][d]).sum::<f64>() / k).collect();
    let sd: Vec<f64> = (0..dim)
        .map(|d| {
            let var = half.iter().map(|&i| (xs[i][d] - mean[d]).powi(2)).sum::<f64>() / k;
            var.max(EDA_VARIANCE_FLOOR).sqrt()
        })
        .collect();
    (0..parents.len())
        .map(|_| (0..dim).map(|d| Normal::new(mean[d], sd[d]).unwrap().sample(rng)).collect())
        .collect()
}

fn pso(
    parents: &[Solution],
    xs: &[&[f64]],
    params: &ParamMap,
    lower: &[f64],
    upper: &[f64],
    rng: &mut SolverRng,
    state: &mut VertexState,
) -> Vec<Vec<f64>> {
    let c = Component::SearchPso;
    let (w, c1, c2) = (param(c, params, "w"), param(c, params, "c1"), param(c, params, "c2"));
    let n = parents.len();
    let dim = lower.len();
    if !matches!(state, VertexState::Pso(s) if s.velocity.len() == n) {
        *state = VertexState::Pso(PsoState {
            velocity: vec![vec![0.0; dim]; n],
            personal_best: xs.iter().zip(parents).map(|(x, p)| (x.to_vec(), p.fitness)).collect(),
        });
    }
    let VertexState::Pso(s) = state else { unreachable!() };
    for (i, p) in parents.iter().enumerate() {
        if p.fitness < s.personal_best[i].1 {
            s.personal_best[i] = (xs[i].to_vec(), p.fitness);
        }
    }
    let g = (0..n)
        .min_by(|&a, &b| better((a, s.personal_best[a].1), (b, s.personal_best[b].1)))
        .unwrap();
    let global = s.personal_best[g].0.clone();
    (0..n)
        .map(|i| {
            let x = xs[i];
            (0..dim)
                .map(|d| {
                    let vmax = upper[d] - lower[d];
                    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                    let v = w * s.velocity[i][d]
                        + c1 * r1 * (s.personal_best[i].0[d] - x[d])
                        + c2 * r2 * (global[d] - x[d]);
                    let v = v.clamp(-vmax, vmax);
                    s.velocity[i][d] = v;
                    x[d] + v
                })
                .collect()
        })
        .collect()
}

fn de(
    component: Component,
    parents: &[Solution],
    xs: &[&[f64]],
    params: &ParamMap,
    rng: &mut SolverRng,
) -> Result<Vec<Vec<f64>>, ComponentError> {
    let n = parents.len();
    if n < 4 {
        return Err(ComponentError::PopulationTooSmall { component, need: 4, got: n });
    }
    let (f, cr) = (param(component, params, "f"), param(component, params, "cr"));
    let best = ranked(parents)[0];
    let dim = xs[0].len();
    Ok((0..n)
        .map(|i| {
            // three distinct indices, all different from the target
            let picks: Vec<usize> = sample(rng, n - 1, 3).into_iter().map(|j| if j >= i { j + 1 } else { j }).collect();
            let (r1, r2, r3) = (xs[picks[0]], xs[picks[1]], xs[picks[2]]);
            let x = xs[i];
            let mutant: Vec<f64> = (0..dim)
                .map(|d| match component {
                    Component::SearchDeRandom => r1[d] + f * (r2[d] - r3[d]),
                    Component::SearchDeCurrent => x[d] + f * (r1[d] - r2[d]),
                    _ => x[d] + f * (xs[best][d] - x[d]) + f * (r1[d] - r2[d]),
                })
                .collect();
            let jrand = rng.random_range(0..dim.max(1));
            (0..dim).map(|d| if d == jrand || rng.random::<f64>() < cr { mutant[d] } else { x[d] }).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::search;
    use super::*;

    #[test]
    fn de_random_zero_f_full_cr_copies_a_base_vector() {
        let d = Domain::continuous(4, -5.0, 5.0);
        let mut r = rng(6);
        let pop = random_pop(&d, 10, &mut r);
        let params = ParamMap::from([("f".into(), 0.0), ("cr".into(), 1.0)]);
        let off = search(Component::SearchDeRandom, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
        for (i, o) in off.iter().enumerate() {
            let base = pop.iter().position(|p| p.genome == o.genome).expect("copy of a member");
            assert_ne!(base, i);
        }
    }

    #[test]
    fn de_needs_four_members() {
        let d = Domain::continuous(2, 0.0, 1.0);
        let mut r = rng(0);
        let pop = random_pop(&d, 3, &mut r);
        let err = search(Component::SearchDeCurrentBest, &pop, &ParamMap::new(), &d, &mut r, &mut VertexState::Empty);
        assert!(matches!(err, Err(ComponentError::PopulationTooSmall { need: 4, got: 3, .. })));
    }

    #[test]
    fn frozen_pso_returns_current_positions() {
        let d = Domain::continuous(3, 0.0, 1.0);
        let mut r = rng(1);
        let params = ParamMap::from([("w".into(), 0.0), ("c1".into(), 0.0), ("c2".into(), 0.0)]);
        let mut state = VertexState::Empty;
        for _ in 0..3 {
            let pop = random_pop(&d, 8, &mut r);
            let off = search(Component::SearchPso, &pop, &params, &d, &mut r, &mut state).unwrap();
            assert!(off.iter().zip(&pop).all(|(o, p)| o.genome == p.genome));
        }
    }

    #[test]
    fn eda_samples_near_the_better_half() {
        let d = Domain::continuous(2, -100.0, 100.0);
        let pop: Vec<Solution> = (0..20)
            .map(|i| {
                let x = if i < 10 { 50.0 } else { -50.0 };
                Solution::with_fitness(Genome::Real(vec![x, x]), i as f64)
            })
            .collect();
        let off = search(Component::SearchEda, &pop, &ParamMap::new(), &d, &mut rng(2), &mut VertexState::Empty).unwrap();
        // zero spread in the better half collapses the model to the floor
        for o in off {
            assert!(o.genome.as_real().unwrap().iter().all(|v| (v - 50.0).abs() < 1e-3));
        }
    }

    #[test]
    fn cma_keeps_offspring_in_bounds_and_reuses_state() {
        let d = Domain::continuous(4, -1.0, 1.0);
        let mut r = rng(3);
        let mut state = VertexState::Empty;
        for _ in 0..5 {
            let pop = random_pop(&d, 12, &mut r);
            let off = search(Component::SearchCma, &pop, &ParamMap::new(), &d, &mut r, &mut state).unwrap();
            assert_eq!(off.len(), 12);
            assert!(off.iter().all(|o| d.contains(&o.genome)));
        }
        assert!(matches!(state, VertexState::Cma(_)));
    }
}
