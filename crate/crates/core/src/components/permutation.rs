use rand::seq::index::sample;
use rand::seq::SliceRandom;

use super::{Genome, Solution, SolverRng};
use crate::catalog::Component;

pub(super) fn permutation(component: Component, parents: &[Solution], rng: &mut SolverRng) -> Vec<Solution> {
    parents
        .iter()
        .map(|p| {
            let mut x = p.genome.as_perm().expect("checked encoding").to_vec();
            if component == Component::ReinitPermutation {
                x.shuffle(rng);
            } else if x.len() >= 2 {
                let (i, j) = two_indices(x.len(), rng);
                match component {
                    Component::SearchSwap => swap_at(&mut x, i, j),
                    Component::SearchSwapMulti => x[i..=j].reverse(),
                    Component::SearchScramble => x[i..=j].shuffle(rng),
                    Component::SearchInsert => insert_at(&mut x, i, j),
                    _ => unreachable!("dispatch"),
                }
            }
            Solution::derived(Genome::Perm(x), p)
        })
        .collect()
}

/// Two distinct indices, smaller first.
fn two_indices(len: usize, rng: &mut SolverRng) -> (usize, usize) {
    let v = sample(rng, len, 2).into_vec();
    (v[0].min(v[1]), v[0].max(v[1]))
}

pub fn swap_at(x: &mut [usize], i: usize, j: usize) {
    x.swap(i, j);
}

/// Moves the element at `j` to directly follow position `i` (`i < j`).
pub fn insert_at(x: &mut [usize], i: usize, j: usize) {
    x[i + 1..=j].rotate_right(1);
}
