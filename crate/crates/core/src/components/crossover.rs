use rand::seq::index::sample;
use rand::Rng;

use super::{param, ComponentError, Domain, Genome, ParamMap, Solution, SolverRng};
use crate::catalog::Component;

/// Pairs consecutive parents `(0,1), (2,3), ...` and recombines each pair.
pub(super) fn crossover(
    component: Component,
    parents: &[Solution],
    params: &ParamMap,
    domain: &Domain,
    rng: &mut SolverRng,
) -> Result<Vec<Solution>, ComponentError> {
    if parents.len() % 2 != 0 {
        return Err(ComponentError::OddParentCount { component, count: parents.len() });
    }
    let mut out = Vec::with_capacity(parents.len());
    for pair in parents.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (ga, gb) = match (&a.genome, &b.genome) {
            (Genome::Real(x), Genome::Real(y)) => {
                let (mut c1, mut c2) = real_pair(component, x, y, params, rng);
                domain.clip_real(&mut c1);
                domain.clip_real(&mut c2);
                (Genome::Real(c1), Genome::Real(c2))
            }
            (Genome::Int(x), Genome::Int(y)) => {
                let (c1, c2) = point_pair(component, x, y, params, rng);
                (Genome::Int(c1), Genome::Int(c2))
            }
            (Genome::Perm(x), Genome::Perm(y)) => {
                let (c1, c2) = order_pair(component, x, y, params, rng);
                (Genome::Perm(c1), Genome::Perm(c2))
            }
            _ => {
                return Err(ComponentError::EncodingMismatch { component, encoding: b.genome.encoding() })
            }
        };
        out.push(Solution::derived(ga, a));
        out.push(Solution::derived(gb, b));
    }
    Ok(out)
}

fn real_pair(
    component: Component,
    x: &[f64],
    y: &[f64],
    params: &ParamMap,
    rng: &mut SolverRng,
) -> (Vec<f64>, Vec<f64>) {
    match component {
        Component::CrossArithmetic => {
            if rng.random::<f64>() >= param(component, params, "rate") {
                return (x.to_vec(), y.to_vec());
            }
            let alpha: f64 = rng.random();
            let c1 = x.iter().zip(y).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let c2 = x.iter().zip(y).map(|(a, b)| (1.0 - alpha) * a + alpha * b).collect();
            (c1, c2)
        }
        Component::CrossSimBinary => {
            let sbx = SbxPair { eta: param(component, params, "eta") };
            x.iter().zip(y).map(|(&a, &b)| sbx.children(a, b, rng.random())).unzip()
        }
        _ => point_pair(component, x, y, params, rng),
    }
}

/// Simulated binary crossover of one coordinate pair.
#[derive(Debug, Clone, Copy)]
pub struct SbxPair {
    pub eta: f64,
}

impl SbxPair {
    /// Children for spread draw `u` in `[0, 1)`. The second child is formed
    /// as `(p1 + p2) - c1`, so the pair keeps the parents' sum.
    pub fn children(&self, p1: f64, p2: f64, u: f64) -> (f64, f64) {
        let e = 1.0 / (self.eta + 1.0);
        let beta = if u <= 0.5 { (2.0 * u).powf(e) } else { (1.0 / (2.0 * (1.0 - u))).powf(e) };
        let c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2);
        (c1, (p1 + p2) - c1)
    }
}

fn point_pair<T: Copy>(
    component: Component,
    x: &[T],
    y: &[T],
    params: &ParamMap,
    rng: &mut SolverRng,
) -> (Vec<T>, Vec<T>) {
    let len = x.len();
    match component {
        Component::CrossPointUniform => {
            let rate = param(component, params, "rate");
            let (mut c1, mut c2) = (x.to_vec(), y.to_vec());
            for i in 0..len {
                if rng.random::<f64>() < rate {
                    std::mem::swap(&mut c1[i], &mut c2[i]);
                }
            }
            (c1, c2)
        }
        _ => {
            let wanted = match component {
                Component::CrossPointOne => 1,
                Component::CrossPointTwo => 2,
                _ => param(component, params, "n") as usize,
            };
            let cuts = random_cuts(len, wanted, rng);
            segment_swap(x, y, &cuts)
        }
    }
}

/// Up to `n` distinct sorted cut positions in `1..len`.
fn random_cuts(len: usize, n: usize, rng: &mut SolverRng) -> Vec<usize> {
    if len < 2 {
        return Vec::new();
    }
    let n = n.clamp(1, len - 1);
    let mut cuts: Vec<usize> = sample(rng, len - 1, n).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    cuts
}

/// Exchanges every other segment between the cut positions.
fn segment_swap<T: Copy>(x: &[T], y: &[T], cuts: &[usize]) -> (Vec<T>, Vec<T>) {
    let (mut c1, mut c2) = (x.to_vec(), y.to_vec());
    let mut swap = false;
    let mut start = 0;
    for &end in cuts.iter().chain(std::iter::once(&x.len())) {
        if swap {
            c1[start..end].copy_from_slice(&y[start..end]);
            c2[start..end].copy_from_slice(&x[start..end]);
        }
        swap = !swap;
        start = end;
    }
    (c1, c2)
}

/// One-point crossover that keeps the first `cut` genes of each parent.
pub fn one_point_at<T: Copy>(x: &[T], y: &[T], cut: usize) -> (Vec<T>, Vec<T>) {
    segment_swap(x, y, &[cut])
}

fn order_pair(
    component: Component,
    x: &[usize],
    y: &[usize],
    params: &ParamMap,
    rng: &mut SolverRng,
) -> (Vec<usize>, Vec<usize>) {
    let n = match component {
        Component::CrossOrderTwo => 2,
        _ => param(component, params, "n") as usize,
    };
    let cuts = random_cuts(x.len(), n, rng);
    (order_child(x, y, &cuts), order_child(y, x, &cuts))
}

/// Keeps the even-numbered segments of `keep` in place and fills the
/// remaining positions with the missing values in the order they appear in
/// `fill`.
fn order_child(keep: &[usize], fill: &[usize], cuts: &[usize]) -> Vec<usize> {
    let len = keep.len();
    let mut child = vec![usize::MAX; len];
    let mut used = vec![false; len];
    let mut start = 0;
    for (s, &end) in cuts.iter().chain(std::iter::once(&len)).enumerate() {
        if s % 2 == 0 {
            for i in start..end {
                child[i] = keep[i];
                used[keep[i]] = true;
            }
        }
        start = end;
    }
    let mut donors = fill.iter().filter(|&&v| !used[v]);
    for slot in child.iter_mut().filter(|c| **c == usize::MAX) {
        *slot = *donors.next().expect("permutation parents");
    }
    child
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{search, VertexState};
    use super::*;

    #[test]
    fn one_point_cut_after_two() {
        let (a, b) = one_point_at(&[1, 2, 3, 4], &[5, 6, 7, 8], 2);
        assert_eq!(a, [1, 2, 7, 8]);
        assert_eq!(b, [5, 6, 3, 4]);
    }

    #[test]
    fn uniform_rate_zero_is_identity() {
        let d = Domain::discrete(12, 5);
        let mut r = rng(5);
        let pop = random_pop(&d, 10, &mut r);
        let params = ParamMap::from([("rate".into(), 0.0)]);
        let off = search(Component::CrossPointUniform, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap();
        for (o, p) in off.iter().zip(&pop) {
            assert_eq!(o.genome, p.genome);
        }
    }

    #[test]
    fn sbx_children_sum_to_parent_sum() {
        // algebraic oracle: c1 + c2 = p1 + p2 for every spread draw
        let d = Domain::continuous(3, -10.0, 10.0);
        for seed in 0..1000 {
            let mut r = rng(seed);
            let parents = vec![
                Solution::with_fitness(Genome::Real(vec![0.2; 3]), 0.0),
                Solution::with_fitness(Genome::Real(vec![0.8; 3]), 0.0),
            ];
            let off = search(Component::CrossSimBinary, &parents, &ParamMap::new(), &d, &mut r, &mut VertexState::Empty).unwrap();
            let (a, b) = (off[0].genome.as_real().unwrap(), off[1].genome.as_real().unwrap());
            for i in 0..3 {
                assert_eq!(a[i] + b[i], 1.0, "seed {seed}");
            }
        }
    }

    #[test]
    fn order_crossovers_yield_permutations() {
        let d = Domain::Permutation { len: 9 };
        let mut r = rng(8);
        for c in [Component::CrossOrderTwo, Component::CrossOrderN] {
            for _ in 0..200 {
                let pop = random_pop(&d, 6, &mut r);
                let off = search(c, &pop, &ParamMap::new(), &d, &mut r, &mut VertexState::Empty).unwrap();
                assert!(off.iter().all(|o| d.contains(&o.genome)));
            }
        }
    }

    #[test]
    fn order_child_keeps_segments() {
        let child = order_child(&[0, 1, 2, 3, 4, 5], &[5, 4, 3, 2, 1, 0], &[2, 4]);
        // segments [0,2) and [4,6) kept from the first parent
        assert_eq!(child, [0, 1, 3, 2, 4, 5]);
    }

    #[test]
    fn odd_parent_count_errors() {
        let d = Domain::discrete(4, 2);
        let mut r = rng(0);
        let pop = random_pop(&d, 3, &mut r);
        let err = search(Component::CrossPointOne, &pop, &ParamMap::new(), &d, &mut r, &mut VertexState::Empty);
        assert!(matches!(err, Err(ComponentError::OddParentCount { count: 3, .. })));
    }
}
