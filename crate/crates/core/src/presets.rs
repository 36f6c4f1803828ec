//! Ready-made graphs: the baseline solvers and two published designs.

use crate::catalog::{Component, Encoding};
use crate::graph::{AlgorithmGraph, Vertex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown baseline `{0}` (expected GA, ILS, SA or RS)")]
pub struct UnknownBaseline(pub String);

fn v(c: Component) -> Vertex {
    Vertex::new(0, c)
}

/// Niching choice, uniform crossover at rate 0.1229, single-entity reset and
/// round-robin selection; designed for RIS phase-shift problems.
pub fn ris_designed() -> AlgorithmGraph {
    AlgorithmGraph::chain(
        Encoding::Discrete,
        vec![
            v(Component::ChooseNich),
            v(Component::CrossPointUniform).with_param("rate", 0.1229),
            v(Component::SearchResetOne),
            v(Component::UpdateRoundRobin),
        ],
    )
}

/// Roulette-wheel choice, one-point crossover, random reset at rate 0.1342
/// and round-robin selection; designed for a rack-stacking problem.
pub fn stacking_designed() -> AlgorithmGraph {
    AlgorithmGraph::chain(
        Encoding::Discrete,
        vec![
            v(Component::ChooseRouletteWheel),
            v(Component::CrossPointOne),
            v(Component::SearchResetRand).with_param("rate", 0.1342),
            v(Component::UpdateRoundRobin),
        ],
    )
}

/// Baseline solvers. Discrete versions follow the classic definitions;
/// other encodings substitute their closest operators:
///
/// | baseline | continuous                 | permutation        |
/// |----------|----------------------------|--------------------|
/// | GA       | cross_point_one, search_mu_uniform(0.2) | cross_order_two, search_swap |
/// | ILS / SA | search_mu_gaussian         | search_swap        |
/// | RS       | reinit_continuous          | reinit_permutation |
pub fn make_baseline(name: &str, encoding: Encoding) -> Result<AlgorithmGraph, UnknownBaseline> {
    use Component::*;
    let neighbour = match encoding {
        Encoding::Continuous => SearchMuGaussian,
        Encoding::Discrete => SearchResetOne,
        Encoding::Permutation => SearchSwap,
    };
    let steps = match name.to_ascii_uppercase().as_str() {
        "GA" => {
            let (cross, mutation) = match encoding {
                Encoding::Continuous => (v(CrossPointOne), v(SearchMuUniform).with_param("rate", 0.2)),
                Encoding::Discrete => (v(CrossPointOne), v(SearchResetRand).with_param("rate", 0.2)),
                Encoding::Permutation => (v(CrossOrderTwo), v(SearchSwap)),
            };
            vec![v(ChooseTournament), cross, mutation, v(UpdateRoundRobin)]
        }
        "ILS" => vec![v(ChooseTraverse), v(neighbour), v(UpdatePairwise)],
        "SA" => vec![v(ChooseTraverse), v(neighbour), v(UpdateSimulatedAnnealing)],
        "RS" => {
            let reinit = match encoding {
                Encoding::Continuous => ReinitContinuous,
                Encoding::Discrete => ReinitDiscrete,
                Encoding::Permutation => ReinitPermutation,
            };
            vec![v(ChooseTraverse), v(reinit), v(UpdateGreedy)]
        }
        _ => return Err(UnknownBaseline(name.to_string())),
    };
    Ok(AlgorithmGraph::chain(encoding, steps))
}

/// A two-pathway graph: a crossover+mutation pathway next to a pure mutation
/// pathway, merging into greedy selection.
pub fn two_pathway_example(encoding: Encoding) -> AlgorithmGraph {
    use Component::*;
    let (cross, mutation) = match encoding {
        Encoding::Continuous => (CrossSimBinary, SearchMuGaussian),
        Encoding::Discrete => (CrossPointTwo, SearchResetOne),
        Encoding::Permutation => (CrossOrderTwo, SearchInsert),
    };
    let vertices = vec![
        Vertex::new(0, ChooseTournament),
        Vertex::new(1, cross),
        Vertex::new(2, mutation),
        Vertex::new(3, mutation),
        Vertex::new(4, UpdateGreedy),
    ];
    AlgorithmGraph {
        encoding,
        entry: 0,
        vertices,
        edges: vec![(0, 1), (0, 3), (1, 2), (2, 4), (3, 4)],
    }
}
