use metadesign::catalog::{Component, Encoding, Role};
use metadesign::components::{self, Domain, Genome, ParamMap, Solution, SolverRng, VertexState};
use metadesign::designer::{disturb, initialize_designs};
use metadesign::graph::{validate_graph, AlgorithmGraph, Violation};
use metadesign::serial::{deserialize, serialize};
use metadesign::space::build_default_space;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_graph(seed: u64, enc: Encoding, moves: usize) -> AlgorithmGraph {
    let space = build_default_space(enc);
    let mut rng = SolverRng::seed_from_u64(seed);
    let mut g = initialize_designs(&space, 1, &mut rng).unwrap().remove(0);
    for _ in 0..moves {
        g = disturb(&g, &space, &mut rng, 1).unwrap();
    }
    g
}

fn encoding(i: usize) -> Encoding {
    Encoding::ALL[i % Encoding::ALL.len()]
}

fn domain(enc: Encoding, dim: usize) -> Domain {
    match enc {
        Encoding::Continuous => Domain::continuous(dim, -5.0, 5.0),
        Encoding::Discrete => Domain::discrete(dim, 4),
        Encoding::Permutation => Domain::Permutation { len: dim },
    }
}

fn population(d: &Domain, n: usize, rng: &mut SolverRng) -> Vec<Solution> {
    (0..n)
        .map(|_| {
            let g = d.random_genome(rng);
            let f = rng.random::<f64>();
            Solution::with_fitness(g, f)
        })
        .collect()
}

fn has(g: &AlgorithmGraph, pred: impl Fn(&Violation) -> bool) -> bool {
    let space = build_default_space(g.encoding);
    validate_graph(g, &space).violations.iter().any(pred)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_graphs_validate(seed in any::<u64>(), e in 0usize..3, moves in 0usize..12) {
        let g = random_graph(seed, encoding(e), moves);
        let space = build_default_space(g.encoding);
        let report = validate_graph(&g, &space);
        prop_assert!(report.is_valid(), "{report}");
        prop_assert!(g.pathway_count() >= 1);
        prop_assert!(g.vertices.iter().all(|v| (1..=5).contains(&v.loop_count)));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), e in 0usize..3, moves in 0usize..12) {
        let g = random_graph(seed, encoding(e), moves);
        let back = deserialize(&serialize(&g)).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize(&back), serialize(&g));
    }

    #[test]
    fn dropped_edge_is_detected(seed in any::<u64>(), e in 0usize..3, k in any::<usize>()) {
        let mut g = random_graph(seed, encoding(e), 3);
        // only edges that leave a vertex unreachable or without a successor
        let load_bearing: Vec<usize> = (0..g.edges.len())
            .filter(|&i| {
                let (a, b) = g.edges[i];
                g.predecessors(b).len() == 1 || g.successors(a).len() == 1
            })
            .collect();
        let i = load_bearing[k % load_bearing.len()];
        g.edges.remove(i);
        let space = build_default_space(g.encoding);
        prop_assert!(!validate_graph(&g, &space).is_valid());
    }

    #[test]
    fn edge_into_entry_is_detected(seed in any::<u64>(), e in 0usize..3, k in any::<usize>()) {
        let mut g = random_graph(seed, encoding(e), 3);
        let others: Vec<_> = g.vertices.iter().map(|v| v.id).filter(|&id| id != g.entry).collect();
        let from = others[k % others.len()];
        g.edges.push((from, g.entry));
        prop_assert!(has(&g, |v| matches!(v, Violation::EdgeIntoChoose(..))));
    }

    #[test]
    fn duplicate_id_is_detected(seed in any::<u64>(), e in 0usize..3, k in any::<usize>()) {
        let mut g = random_graph(seed, encoding(e), 3);
        let i = k % g.vertices.len();
        let mut dup = g.vertices[i].clone();
        dup.component = g.vertices[(i + 1) % g.vertices.len()].component;
        g.vertices.push(dup);
        prop_assert!(has(&g, |v| matches!(v, Violation::DuplicateVertexId(_))));
    }

    #[test]
    fn zero_loop_count_is_detected(seed in any::<u64>(), e in 0usize..3, k in any::<usize>()) {
        let mut g = random_graph(seed, encoding(e), 3);
        let searches = g.ids_with_role(Role::Search);
        let id = searches[k % searches.len()];
        g.vertex_mut(id).unwrap().loop_count = if k % 2 == 0 { 0 } else { 6 };
        prop_assert!(has(&g, |v| matches!(v, Violation::LoopCountOutOfRange { .. })), "loop count not flagged");
    }

    #[test]
    fn out_of_range_param_is_detected(seed in any::<u64>(), e in 0usize..3, over in 0.001f64..10.0) {
        let mut g = random_graph(seed, encoding(e), 3);
        let entry = g.entry;
        let v = g.vertex_mut(entry).unwrap();
        v.component = Component::ChooseTournament;
        v.params.insert("k".into(), 10.0 + over);
        prop_assert!(has(&g, |v| matches!(v, Violation::ParamOutOfRange { .. })), "param not flagged");
    }

    #[test]
    fn search_output_stays_in_domain(seed in any::<u64>(), c in 0usize..64, half in 2usize..10, dim in 2usize..12) {
        let searches: Vec<Component> = Component::ALL.iter().copied().filter(|c| c.role() == Role::Search).collect();
        let comp = searches[c % searches.len()];
        let enc = comp.encodings()[seed as usize % comp.encodings().len()];
        let d = domain(enc, dim);
        let mut rng = SolverRng::seed_from_u64(seed);
        let pop = population(&d, 2 * half, &mut rng);
        let params = ParamMap::new();
        let run = |s: u64| {
            let mut r = SolverRng::seed_from_u64(s);
            components::search(comp, &pop, &params, &d, &mut r, &mut VertexState::Empty).unwrap()
        };
        let a = run(seed ^ 1);
        prop_assert_eq!(a.len(), pop.len());
        prop_assert!(a.iter().all(|s| d.contains(&s.genome) && s.genome.encoding() == enc));
        let b = run(seed ^ 1);
        let ga: Vec<&Genome> = a.iter().map(|s| &s.genome).collect();
        let gb: Vec<&Genome> = b.iter().map(|s| &s.genome).collect();
        prop_assert_eq!(ga, gb);
    }
}
