use std::collections::VecDeque;

use super::{better, param, Genome, ParamMap, Solution};
use crate::catalog::Component;

/// Exact key for discrete and permutation genomes; continuous coordinates
/// are rounded to 6 decimals, so continuous tabu matching is coarse.
pub fn genome_key(g: &Genome) -> String {
    match g {
        Genome::Real(x) => x.iter().map(|v| format!("{:.6}", v + 0.0)).collect::<Vec<_>>().join(","),
        Genome::Int(x) | Genome::Perm(x) => x.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArchiveState {
    Best { capacity: usize, members: Vec<Solution> },
    Diversity { capacity: usize, members: Vec<Solution> },
    Tabu { tenure: usize, entries: VecDeque<(String, Genome)> },
}

impl ArchiveState {
    pub fn new(component: Component, params: &ParamMap) -> Self {
        match component {
            Component::ArchiveBest => ArchiveState::Best {
                capacity: (param(component, params, "capacity") as usize).max(1),
                members: Vec::new(),
            },
            Component::ArchiveDiversity => ArchiveState::Diversity {
                capacity: (param(component, params, "capacity") as usize).max(1),
                members: Vec::new(),
            },
            Component::ArchiveTabu => ArchiveState::Tabu {
                tenure: (param(component, params, "tenure") as usize).max(1),
                entries: VecDeque::new(),
            },
            other => panic!("{other} is not an archive"),
        }
    }

    pub fn component(&self) -> Component {
        match self {
            ArchiveState::Best { .. } => Component::ArchiveBest,
            ArchiveState::Diversity { .. } => Component::ArchiveDiversity,
            ArchiveState::Tabu { .. } => Component::ArchiveTabu,
        }
    }

    /// Folds newly accepted solutions into the archive.
    pub fn observe(&mut self, candidates: &[Solution]) {
        match self {
            ArchiveState::Best { capacity, members } => {
                for c in candidates {
                    let key = genome_key(&c.genome);
                    if !members.iter().any(|m| genome_key(&m.genome) == key) {
                        members.push(c.clone());
                    }
                }
                let mut order: Vec<usize> = (0..members.len()).collect();
                order.sort_by(|&a, &b| better((a, members[a].fitness), (b, members[b].fitness)));
                *members = order.into_iter().take(*capacity).map(|i| members[i].clone()).collect();
            }
            ArchiveState::Diversity { capacity, members } => {
                let mut pool = members.clone();
                for c in candidates {
                    let key = genome_key(&c.genome);
                    if !pool.iter().any(|m| genome_key(&m.genome) == key) {
                        pool.push(c.clone());
                    }
                }
                *members = max_min_subset(&pool, *capacity).into_iter().map(|i| pool[i].clone()).collect();
            }
            ArchiveState::Tabu { tenure, entries } => {
                for c in candidates {
                    entries.push_back((genome_key(&c.genome), c.genome.clone()));
                    while entries.len() > *tenure {
                        entries.pop_front();
                    }
                }
            }
        }
    }

    pub fn is_tabu(&self, g: &Genome) -> bool {
        match self {
            ArchiveState::Tabu { entries, .. } => {
                let key = genome_key(g);
                entries.iter().any(|(k, _)| *k == key)
            }
            _ => false,
        }
    }

    pub fn genomes(&self) -> Vec<Genome> {
        match self {
            ArchiveState::Best { members, .. } | ArchiveState::Diversity { members, .. } => {
                members.iter().map(|m| m.genome.clone()).collect()
            }
            ArchiveState::Tabu { entries, .. } => entries.iter().map(|e| e.1.clone()).collect(),
        }
    }
}

/// Applies archive `component` to `candidates`, creating the state on first use.
pub fn archive(
    component: Component,
    state: Option<ArchiveState>,
    candidates: &[Solution],
    params: &ParamMap,
) -> ArchiveState {
    let mut s = state.unwrap_or_else(|| ArchiveState::new(component, params));
    s.observe(candidates);
    s
}

/// Greedy max-min selection seeded with the farthest pair.
fn max_min_subset(pool: &[Solution], k: usize) -> Vec<usize> {
    let n = pool.len();
    if n <= k {
        return (0..n).collect();
    }
    let dist = |a: usize, b: usize| pool[a].genome.distance(&pool[b].genome);
    let mut seed = (0, 1, f64::NEG_INFINITY);
    for a in 0..n {
        for b in a + 1..n {
            let d = dist(a, b);
            if d > seed.2 {
                seed = (a, b, d);
            }
        }
    }
    let mut chosen = vec![seed.0];
    if k > 1 {
        chosen.push(seed.1);
    }
    let mut gap: Vec<f64> = (0..n).map(|i| chosen.iter().map(|&c| dist(i, c)).fold(f64::INFINITY, f64::min)).collect();
    while chosen.len() < k {
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| gap[a].total_cmp(&gap[b]).then(b.cmp(&a)))
            .unwrap();
        chosen.push(next);
        for i in 0..n {
            gap[i] = gap[i].min(dist(i, next));
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(x: f64, f: f64) -> Solution {
        Solution::with_fitness(Genome::Real(vec![x]), f)
    }

    #[test]
    fn best_archive_tracks_running_minimum() {
        let params = ParamMap::from([("capacity".into(), 1.0)]);
        let mut s = None;
        for (i, f) in [3.0, 1.0, 2.0].into_iter().enumerate() {
            s = Some(archive(Component::ArchiveBest, s, &[sol(i as f64, f)], &params));
        }
        let ArchiveState::Best { members, .. } = s.unwrap() else { panic!() };
        assert_eq!(members.len(), 1);
        assert_eq!(members[0].fitness, 1.0);
    }

    #[test]
    fn tabu_is_fifo() {
        let params = ParamMap::from([("tenure".into(), 2.0)]);
        let g = |v: usize| Genome::Int(vec![v, v]);
        let mut s = None;
        for v in 1..=3 {
            s = Some(archive(Component::ArchiveTabu, s, &[Solution::with_fitness(g(v), 0.0)], &params));
        }
        let s = s.unwrap();
        assert_eq!(s.genomes(), [g(2), g(3)]);
        assert!(!s.is_tabu(&g(1)));
        assert!(s.is_tabu(&g(3)));
    }

    #[test]
    fn diversity_archive_keeps_extremes() {
        let params = ParamMap::from([("capacity".into(), 2.0)]);
        let s = archive(Component::ArchiveDiversity, None, &[sol(0.0, 0.0), sol(0.1, 0.0), sol(1.0, 0.0)], &params);
        assert_eq!(s.genomes(), [Genome::Real(vec![0.0]), Genome::Real(vec![1.0])]);
    }

    #[test]
    fn continuous_keys_round_to_six_decimals() {
        assert_eq!(genome_key(&Genome::Real(vec![0.1234564, -0.0])), "0.123456,0.000000");
        assert_eq!(genome_key(&Genome::Real(vec![0.1234561])), genome_key(&Genome::Real(vec![0.1234559])));
    }
}
