use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::Rng;

use super::{better, param, ComponentError, ParamMap, Solution, SolverRng};
use crate::catalog::{Component, Role};

/// NBC edge-cut factor: links longer than this multiple of the mean link
/// length separate niches.
const NBC_CUT: f64 = 2.0;
const LLOYD_ITERATIONS: usize = 5;
/// Probability of picking a cluster's best member rather than a random one.
const CLUSTER_BEST_PROB: f64 = 0.7;

/// Returns `pop.len()` parent indices.
pub fn choose(
    component: Component,
    pop: &[Solution],
    params: &ParamMap,
    rng: &mut SolverRng,
) -> Result<Vec<usize>, ComponentError> {
    if component.role() != Role::Choose {
        return Err(ComponentError::WrongRole { component, role: component.role() });
    }
    if pop.is_empty() {
        return Err(ComponentError::EmptyPopulation);
    }
    let n = pop.len();
    Ok(match component {
        Component::ChooseTraverse => (0..n).collect(),
        Component::ChooseRouletteWheel => {
            let dist = WeightedIndex::new(rank_weights(pop)).expect("positive weights");
            (0..n).map(|_| dist.sample(rng)).collect()
        }
        Component::ChooseTournament => {
            let k = (param(component, params, "k") as usize).clamp(1, n);
            (0..n)
                .map(|_| {
                    sample(rng, n, k)
                        .into_iter()
                        .min_by(|&a, &b| better((a, pop[a].fitness), (b, pop[b].fitness)))
                        .unwrap()
                })
                .collect()
        }
        Component::ChooseCluster => {
            let k = (param(component, params, "k") as usize).clamp(1, n);
            cluster_choice(pop, k, rng)
        }
        Component::ChooseNich => niche_choice(pop, rng),
        _ => unreachable!("role checked"),
    })
}

/// Rank weight `N - r + 1` for rank `r` (1 = best); tied fitness values share
/// their average rank.
fn rank_weights(pop: &[Solution]) -> Vec<f64> {
    let n = pop.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pop[a].fitness.total_cmp(&pop[b].fitness));
    let mut weights = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pop[order[j + 1]].fitness == pop[order[i]].fitness {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            weights[idx] = n as f64 - avg_rank + 1.0;
        }
        i = j + 1;
    }
    weights
}

fn cluster_choice(pop: &[Solution], k: usize, rng: &mut SolverRng) -> Vec<usize> {
    let n = pop.len();
    let points: Vec<Vec<f64>> = pop.iter().map(|s| s.genome.coords()).collect();
    let mut centers: Vec<Vec<f64>> = sample(rng, n, k).into_iter().map(|i| points[i].clone()).collect();
    let nearest = |p: &[f64], centers: &[Vec<f64>]| -> usize {
        (0..centers.len())
            .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])))
            .unwrap()
    };
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..LLOYD_ITERATIONS {
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> =
                points.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            for (d, x) in center.iter_mut().enumerate() {
                *x = members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64;
            }
        }
        assign = points.iter().map(|p| nearest(p, &centers)).collect();
    }

    let clusters: Vec<Vec<usize>> = (0..k)
        .map(|c| (0..n).filter(|&i| assign[i] == c).collect::<Vec<_>>())
        .filter(|m| !m.is_empty())
        .collect();
    let bests: Vec<usize> = clusters
        .iter()
        .map(|m| *m.iter().min_by(|&&a, &&b| better((a, pop[a].fitness), (b, pop[b].fitness))).unwrap())
        .collect();
    let best_solutions: Vec<Solution> = bests.iter().map(|&i| pop[i].clone()).collect();
    let dist = WeightedIndex::new(rank_weights(&best_solutions)).expect("positive weights");
    (0..n)
        .map(|_| {
            let c = dist.sample(rng);
            if rng.random::<f64>() < CLUSTER_BEST_PROB {
                bests[c]
            } else {
                clusters[c][rng.random_range(0..clusters[c].len())]
            }
        })
        .collect()
}

/// Niches from nearest-better clustering.
pub(crate) fn niches(pop: &[Solution]) -> Vec<usize> {
    let n = pop.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| better((a, pop[a].fitness), (b, pop[b].fitness)));
    let mut link: Vec<Option<(usize, f64)>> = vec![None; n];
    for (rank, &i) in order.iter().enumerate().skip(1) {
        let nb = order[..rank]
            .iter()
            .map(|&j| (j, pop[i].genome.distance(&pop[j].genome)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        link[i] = Some(nb);
    }
    let lengths: Vec<f64> = link.iter().flatten().map(|l| l.1).collect();
    let mean = if lengths.is_empty() { 0.0 } else { lengths.iter().sum::<f64>() / lengths.len() as f64 };
    for l in link.iter_mut() {
        if let Some((_, d)) = l {
            if *d > NBC_CUT * mean {
                *l = None;
            }
        }
    }
    // Links point to better solutions, so resolving in rank order sees the
    // target's root first.
    let mut root = vec![usize::MAX; n];
    for &i in &order {
        root[i] = match link[i] {
            Some((j, _)) => root[j],
            None => i,
        };
    }
    root
}

/// Consecutive parent pairs are drawn from the same niche.
fn niche_choice(pop: &[Solution], rng: &mut SolverRng) -> Vec<usize> {
    let n = pop.len();
    let root = niches(pop);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a = rng.random_range(0..n);
        out.push(a);
        if out.len() < n {
            let members: Vec<usize> = (0..n).filter(|&i| root[i] == root[a]).collect();
            out.push(members[rng.random_range(0..members.len())]);
        }
    }
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{Domain, Genome};
    use super::*;

    fn pop_with(fit: &[f64]) -> Vec<Solution> {
        fit.iter().enumerate().map(|(i, &f)| Solution::with_fitness(Genome::Real(vec![i as f64]), f)).collect()
    }

    #[test]
    fn traverse_is_identity() {
        let p = pop_with(&[3.0, 1.0, 2.0, 0.0]);
        assert_eq!(choose(Component::ChooseTraverse, &p, &ParamMap::new(), &mut rng(0)).unwrap(), [0, 1, 2, 3]);
    }

    #[test]
    fn full_tournament_always_picks_best() {
        let p = pop_with(&[3.0, 1.0, -2.0, 0.0]);
        let params = ParamMap::from([("k".to_string(), 4.0)]);
        let idx = choose(Component::ChooseTournament, &p, &params, &mut rng(3)).unwrap();
        assert!(idx.iter().all(|&i| i == 2));
    }

    #[test]
    fn roulette_uniform_on_equal_fitness() {
        // multinomial oracle: each count ~ Binomial(draws, 1/n)
        let n = 10;
        let p = pop_with(&vec![1.0; n]);
        let mut counts = vec![0usize; n];
        let mut r = rng(11);
        let mut draws = 0;
        while draws < 10_000 {
            for i in choose(Component::ChooseRouletteWheel, &p, &ParamMap::new(), &mut r).unwrap() {
                counts[i] += 1;
                draws += 1;
            }
        }
        let pr = 1.0 / n as f64;
        let mean = draws as f64 * pr;
        let sd = (draws as f64 * pr * (1.0 - pr)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 3.0 * sd, "{c} vs {mean}±{sd}");
        }
    }

    #[test]
    fn roulette_favours_better_ranks() {
        let p = pop_with(&[5.0, 1.0]);
        let mut counts = [0usize; 2];
        let mut r = rng(2);
        for _ in 0..3000 {
            for i in choose(Component::ChooseRouletteWheel, &p, &ParamMap::new(), &mut r).unwrap() {
                counts[i] += 1;
            }
        }
        // weights 1 : 2
        let frac = counts[1] as f64 / 6000.0;
        assert!((frac - 2.0 / 3.0).abs() < 0.03, "{frac}");
    }

    #[test]
    fn niches_split_distant_groups() {
        let mut p = Vec::new();
        for (i, x) in [0.0, 0.1, 0.2, 10.0, 10.1, 10.2].iter().enumerate() {
            p.push(Solution::with_fitness(Genome::Real(vec![*x]), [0.0, 1.0, 2.0, 0.5, 1.5, 2.5][i]));
        }
        let root = niches(&p);
        assert_eq!(root[0], root[1]);
        assert_eq!(root[1], root[2]);
        assert_eq!(root[3], root[4]);
        assert_ne!(root[0], root[3]);
        let idx = choose(Component::ChooseNich, &p, &ParamMap::new(), &mut rng(9)).unwrap();
        for pair in idx.chunks(2) {
            assert_eq!(root[pair[0]], root[pair[1]]);
        }
    }

    #[test]
    fn cluster_choice_returns_population_size() {
        let d = Domain::continuous(3, 0.0, 1.0);
        let mut r = rng(4);
        let p = random_pop(&d, 17, &mut r);
        let idx = choose(Component::ChooseCluster, &p, &ParamMap::new(), &mut r).unwrap();
        assert_eq!(idx.len(), 17);
        assert!(idx.iter().all(|&i| i < 17));
    }

    #[test]
    fn empty_population_errors() {
        assert_eq!(
            choose(Component::ChooseTraverse, &[], &ParamMap::new(), &mut rng(0)),
            Err(ComponentError::EmptyPopulation)
        );
    }
}
