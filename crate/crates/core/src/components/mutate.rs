use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use super::{param, Domain, Genome, ParamMap, Solution, SolverRng};
use crate::catalog::Component;

/// Continuous mutations. Step sizes are relative to each dimension's width.
pub(super) fn mutate(
    component: Component,
    parents: &[Solution],
    params: &ParamMap,
    domain: &Domain,
    rng: &mut SolverRng,
) -> Vec<Solution> {
    let (lower, upper) = domain.real_bounds().expect("continuous domain");
    parents
        .iter()
        .map(|p| {
            let mut x = p.genome.as_real().expect("checked encoding").to_vec();
            for (d, v) in x.iter_mut().enumerate() {
                let (l, u) = (lower[d], upper[d]);
                let w = u - l;
                match component {
                    Component::SearchMuGaussian => {
                        let sigma = param(component, params, "sigma") * w;
                        if sigma > 0.0 {
                            *v += Normal::new(0.0, sigma).unwrap().sample(rng);
                        }
                    }
                    Component::SearchMuCauchy => {
                        let scale = param(component, params, "scale") * w;
                        if scale > 0.0 {
                            *v += Cauchy::new(0.0, scale).unwrap().sample(rng);
                        }
                    }
                    Component::SearchMuPolynomial => {
                        if rng.random::<f64>() < param(component, params, "rate") {
                            *v = polynomial(*v, l, u, param(component, params, "eta"), rng.random());
                        }
                    }
                    Component::SearchMuUniform => {
                        if rng.random::<f64>() < param(component, params, "rate") {
                            *v = l + rng.random::<f64>() * w;
                        }
                    }
                    Component::ReinitContinuous => *v = l + rng.random::<f64>() * w,
                    _ => unreachable!("dispatch"),
                }
            }
            domain.clip_real(&mut x);
            Solution::derived(Genome::Real(x), p)
        })
        .collect()
}

/// Bounded polynomial mutation of one coordinate with draw `r` in `[0, 1)`.
fn polynomial(x: f64, l: f64, u: f64, eta: f64, r: f64) -> f64 {
    let w = u - l;
    if w <= 0.0 {
        return x;
    }
    let (d1, d2) = ((x - l) / w, (u - x) / w);
    let pow = 1.0 / (eta + 1.0);
    let dq = if r < 0.5 {
        let val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta + 1.0);
        val.powf(pow) - 1.0
    } else {
        let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - val.powf(pow)
    };
    (x + dq * w).clamp(l, u)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{search, VertexState};
    use super::*;

    #[test]
    fn zero_sigma_gaussian_is_identity() {
        let d = Domain::continuous(5, -3.0, 3.0);
        let mut r = rng(1);
        let pop = random_pop(&d, 8, &mut r);
        let params = ParamMap::from([("sigma".into(), 0.0)]);
        let off = search(Component::SearchMuGaussian, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
        assert!(off.iter().zip(&pop).all(|(o, p)| o.genome == p.genome));
    }

    #[test]
    fn reinit_is_uniform_by_ks() {
        // Kolmogorov-Smirnov against U(0,1); critical value at alpha = 0.01
        let d = Domain::continuous(1, 0.0, 1.0);
        let mut r = rng(21);
        let pop = random_pop(&d, 10_000, &mut r);
        let off = search(Component::ReinitContinuous, &pop, &ParamMap::new(), &d, &mut r, &mut VertexState::Empty).unwrap();
        let mut xs: Vec<f64> = off.iter().map(|o| o.genome.as_real().unwrap()[0]).collect();
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let dstat = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max);
        assert!(dstat < 1.628 / n.sqrt(), "D = {dstat}");
    }

    #[test]
    fn polynomial_step_shrinks_with_eta() {
        let d = Domain::continuous(1, 0.0, 1.0);
        let mean_step = |eta: f64, seed| {
            let mut r = rng(seed);
            let params = ParamMap::from([("rate".into(), 1.0), ("eta".into(), eta)]);
            let pop: Vec<Solution> =
                (0..10_000).map(|_| Solution::with_fitness(Genome::Real(vec![0.5]), 0.0)).collect();
            let off = search(Component::SearchMuPolynomial, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
            off.iter().map(|o| (o.genome.as_real().unwrap()[0] - 0.5).abs()).sum::<f64>() / 10_000.0
        };
        assert!(mean_step(20.0, 3) < mean_step(2.0, 4));
    }

    #[test]
    fn polynomial_stays_in_bounds_at_edges() {
        for r in [0.0, 0.25, 0.5, 0.75, 0.999] {
            for x in [0.0, 1.0] {
                let y = polynomial(x, 0.0, 1.0, 5.0, r);
                assert!((0.0..=1.0).contains(&y));
            }
        }
    }
}
