//! Random initial designs and the local moves used to disturb them.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::DesignError;
use crate::catalog::{Component, ParamKind, Role};
use crate::graph::{AlgorithmGraph, Vertex, VertexId, MAX_LOOP_COUNT};
use crate::space::DesignSpace;

/// Probability that an initial design gets an archive vertex.
pub const ARCHIVE_PROB: f64 = 0.3;

fn allowed(space: &DesignSpace, role: Role) -> Vec<Component> {
    space.components(role).into_iter().filter(|c| role != Role::Search || c.supports(space.encoding)).collect()
}

fn sample_params<R: Rng>(space: &DesignSpace, v: &mut Vertex, rng: &mut R) {
    v.params.clear();
    for p in v.component.params() {
        let (lo, hi) = space.param_range(v.component, p.name);
        v.params.insert(p.name.to_string(), p.denormalize(rng.random(), lo, hi));
    }
}

fn random_vertex<R: Rng>(space: &DesignSpace, id: VertexId, role: Role, rng: &mut R) -> Result<Vertex, DesignError> {
    let c = *allowed(space, role).choose(rng).ok_or(DesignError::EmptySpaceRole(role))?;
    let mut v = Vertex::new(id, c);
    sample_params(space, &mut v, rng);
    Ok(v)
}

/// Samples `n` valid graphs from `space`. In fixed-topology mode the first
/// output is the fixed graph itself and the rest resample its tunable
/// parameters.
pub fn initialize_designs<R: Rng>(space: &DesignSpace, n: usize, rng: &mut R) -> Result<Vec<AlgorithmGraph>, DesignError> {
    space.check()?;
    if let Some(fixed) = &space.fixed_topology {
        return Ok((0..n)
            .map(|i| {
                let mut g = fixed.clone();
                if i > 0 {
                    for (id, name) in space.tunable_slots(&g) {
                        resample_param(space, &mut g, id, &name, rng);
                    }
                }
                g
            })
            .collect());
    }
    (0..n).map(|_| random_design(space, rng)).collect()
}

fn random_design<R: Rng>(space: &DesignSpace, rng: &mut R) -> Result<AlgorithmGraph, DesignError> {
    let paths = rng.random_range(1..=space.max_pathways.min(space.max_search_vertices));
    let searches = rng.random_range(paths..=space.max_search_vertices);
    let mut lengths = vec![1; paths];
    for _ in paths..searches {
        lengths[rng.random_range(0..paths)] += 1;
    }
    let mut vertices = vec![random_vertex(space, 0, Role::Choose, rng)?];
    let update = searches + 1;
    let mut edges = Vec::new();
    let mut id = 1;
    for len in lengths {
        let mut prev = 0;
        for _ in 0..len {
            vertices.push(random_vertex(space, id, Role::Search, rng)?);
            edges.push((prev, id));
            prev = id;
            id += 1;
        }
        edges.push((prev, update));
    }
    vertices.push(random_vertex(space, update, Role::Update, rng)?);
    if !allowed(space, Role::Archive).is_empty() && rng.random::<f64>() < ARCHIVE_PROB {
        vertices.push(random_vertex(space, update + 1, Role::Archive, rng)?);
        edges.push((update, update + 1));
    }
    let mut g = AlgorithmGraph { encoding: space.encoding, entry: 0, vertices, edges };
    g.normalize();
    Ok(g)
}

fn resample_param<R: Rng>(space: &DesignSpace, g: &mut AlgorithmGraph, id: VertexId, name: &str, rng: &mut R) {
    let v = g.vertex_mut(id).expect("slot vertex");
    let schema = v.component.param(name).expect("slot param");
    let (lo, hi) = space.param_range(v.component, name);
    let current = v.param(name);
    let value = match schema.kind {
        // draw a different integer whenever the range allows it
        ParamKind::Integer if hi - lo >= 1.0 => {
            let values: Vec<f64> = (lo.ceil() as i64..=hi.floor() as i64).map(|k| k as f64).filter(|&k| k != current).collect();
            *values.choose(rng).unwrap_or(&current)
        }
        _ => schema.denormalize(rng.random(), lo, hi),
    };
    v.params.insert(name.to_string(), value);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Replace,
    Insert,
    Delete,
    AddPathway,
    RemovePathway,
    LoopUp,
    LoopDown,
    Resample,
}

fn is_flow(g: &AlgorithmGraph, id: VertexId, roles: &[Role]) -> bool {
    g.vertex(id).is_some_and(|v| roles.contains(&v.role()))
}

fn replace_targets(g: &AlgorithmGraph, space: &DesignSpace) -> Vec<VertexId> {
    g.vertices.iter().filter(|v| allowed(space, v.role()).len() > 1).map(|v| v.id).collect()
}

fn insert_edges(g: &AlgorithmGraph) -> Vec<(VertexId, VertexId)> {
    g.edges
        .iter()
        .copied()
        .filter(|&(a, b)| is_flow(g, a, &[Role::Choose, Role::Search]) && is_flow(g, b, &[Role::Search, Role::Update]))
        .collect()
}

fn deletable(g: &AlgorithmGraph) -> Vec<VertexId> {
    g.ids_with_role(Role::Search)
        .into_iter()
        .filter(|&v| {
            let parent_is_choose = g.predecessors(v).iter().any(|&p| p == g.entry);
            let feeds_update = g.successors(v).iter().any(|&s| is_flow(g, s, &[Role::Update]));
            !(parent_is_choose && feeds_update)
        })
        .collect()
}

fn loop_targets(g: &AlgorithmGraph, up: bool) -> Vec<VertexId> {
    g.vertices
        .iter()
        .filter(|v| v.role() == Role::Search && if up { v.loop_count < MAX_LOOP_COUNT } else { v.loop_count > 1 })
        .map(|v| v.id)
        .collect()
}

/// Moves applicable to `g` in `space`.
pub fn applicable_moves(g: &AlgorithmGraph, space: &DesignSpace) -> Vec<Move> {
    let mut moves = Vec::new();
    if space.fixed_topology.is_none() {
        let room = g.search_count() < space.max_search_vertices;
        let checks = [
            (Move::Replace, !replace_targets(g, space).is_empty()),
            (Move::Insert, room),
            (Move::Delete, !deletable(g).is_empty()),
            (Move::AddPathway, room && g.pathway_count() < space.max_pathways),
            (Move::RemovePathway, g.pathway_count() >= 2),
            (Move::LoopUp, !loop_targets(g, true).is_empty()),
            (Move::LoopDown, !loop_targets(g, false).is_empty()),
        ];
        moves.extend(checks.iter().filter(|c| c.1).map(|c| c.0));
    }
    if !space.tunable_slots(g).is_empty() {
        moves.push(Move::Resample);
    }
    moves
}

/// Applies `strength` random moves to `graph`. When only the hyperparameter
/// move applies it is used; when nothing applies the result is
/// [`DesignError::NoApplicableMove`].
pub fn disturb<R: Rng>(graph: &AlgorithmGraph, space: &DesignSpace, rng: &mut R, strength: usize) -> Result<AlgorithmGraph, DesignError> {
    let mut g = graph.clone();
    for _ in 0..strength.max(1) {
        let moves = applicable_moves(&g, space);
        let m = *moves.choose(rng).ok_or(DesignError::NoApplicableMove)?;
        apply_move(&mut g, space, m, rng)?;
    }
    g.normalize();
    Ok(g)
}

/// Applies one move of kind `m`; the move must be applicable.
pub fn apply_move<R: Rng>(g: &mut AlgorithmGraph, space: &DesignSpace, m: Move, rng: &mut R) -> Result<(), DesignError> {
    let pick = |v: Vec<VertexId>, rng: &mut R| *v.choose(rng).expect("applicable move");
    match m {
        Move::Replace => {
            let id = pick(replace_targets(g, space), rng);
            let v = g.vertex_mut(id).unwrap();
            let others: Vec<Component> = allowed(space, v.role()).into_iter().filter(|&c| c != v.component).collect();
            v.component = *others.choose(rng).unwrap();
            sample_params(space, v, rng);
        }
        Move::Insert => {
            let (a, b) = *insert_edges(g).choose(rng).unwrap();
            let id = g.next_vertex_id();
            g.vertices.push(random_vertex(space, id, Role::Search, rng)?);
            g.edges.retain(|&e| e != (a, b));
            g.edges.extend([(a, id), (id, b)]);
        }
        Move::Delete => {
            let v = pick(deletable(g), rng);
            let parent = g.predecessors(v)[0];
            let children = g.successors(v);
            g.vertices.retain(|x| x.id != v);
            g.edges.retain(|e| e.0 != v && e.1 != v);
            for c in children {
                if !g.edges.contains(&(parent, c)) {
                    g.edges.push((parent, c));
                }
            }
        }
        Move::AddPathway => {
            let mut parents = g.ids_with_role(Role::Search);
            parents.push(g.entry);
            let parent = pick(parents, rng);
            let update = g.update_id().expect("valid graph");
            let id = g.next_vertex_id();
            g.vertices.push(random_vertex(space, id, Role::Search, rng)?);
            g.edges.extend([(parent, id), (id, update)]);
        }
        Move::RemovePathway => {
            let update = g.update_id().expect("valid graph");
            let mut x = pick(g.predecessors(update), rng);
            g.edges.retain(|&e| e != (x, update));
            // prune the branch back to the nearest vertex with other successors
            while x != g.entry && g.successors(x).is_empty() {
                let parent = g.predecessors(x)[0];
                g.vertices.retain(|v| v.id != x);
                g.edges.retain(|e| e.0 != x && e.1 != x);
                x = parent;
            }
        }
        Move::LoopUp | Move::LoopDown => {
            let id = pick(loop_targets(g, m == Move::LoopUp), rng);
            let v = g.vertex_mut(id).unwrap();
            if m == Move::LoopUp {
                v.loop_count += 1;
            } else {
                v.loop_count -= 1;
            }
        }
        Move::Resample => {
            let slots = space.tunable_slots(g);
            let (id, name) = slots.choose(rng).expect("applicable move").clone();
            resample_param(space, g, id, &name, rng);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Encoding;
    use crate::graph::validate_graph;
    use crate::presets;
    use crate::space::build_default_space;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, BTreeSet};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sampled_designs_are_valid() {
        let mut r = rng(1);
        for enc in Encoding::ALL {
            let space = build_default_space(enc);
            for g in initialize_designs(&space, 3000, &mut r).unwrap() {
                let report = validate_graph(&g, &space);
                assert!(report.is_valid(), "{report}");
                assert!(g.vertices.iter().all(|v| v.loop_count == 1));
            }
        }
    }

    #[test]
    fn archive_frequency_near_prob() {
        let space = build_default_space(Encoding::Continuous);
        let gs = initialize_designs(&space, 10_000, &mut rng(2)).unwrap();
        let frac = gs.iter().filter(|g| !g.ids_with_role(Role::Archive).is_empty()).count() as f64 / 1e4;
        // binomial sd is about 0.0046
        assert!((frac - ARCHIVE_PROB).abs() < 0.015, "{frac}");
    }

    #[test]
    fn singleton_space_gives_the_minimal_graph() {
        let mut space = build_default_space(Encoding::Discrete);
        space.allowed = BTreeMap::from([
            (Role::Choose, BTreeSet::from([Component::ChooseTraverse])),
            (Role::Search, BTreeSet::from([Component::ReinitDiscrete])),
            (Role::Update, BTreeSet::from([Component::UpdateGreedy])),
            (Role::Archive, BTreeSet::new()),
        ]);
        space.max_search_vertices = 1;
        space.max_pathways = 1;
        let g = initialize_designs(&space, 1, &mut rng(0)).unwrap().remove(0);
        assert_eq!(g, presets::make_baseline("RS", Encoding::Discrete).unwrap());
        // only loop moves remain
        assert_eq!(applicable_moves(&g, &space), [Move::LoopUp]);
    }

    #[test]
    fn fixed_topology_outputs_differ_only_in_tunable_rate() {
        let fixed = presets::stacking_designed();
        let space = build_default_space(Encoding::Discrete)
            .with_fixed_topology(fixed.clone(), Some(BTreeSet::from([(2, "rate".to_string())])));
        let gs = initialize_designs(&space, 20, &mut rng(3)).unwrap();
        assert_eq!(gs[0], fixed);
        for g in &gs[1..] {
            assert!(g.same_topology(&fixed));
            let mut h = g.clone();
            h.vertex_mut(2).unwrap().params.insert("rate".into(), 0.1342);
            assert_eq!(h, fixed);
            assert_ne!(g.vertex(2).unwrap().param("rate"), 0.1342);
        }
    }

    #[test]
    fn disturbed_designs_are_valid() {
        let mut r = rng(4);
        for enc in Encoding::ALL {
            let space = build_default_space(enc);
            let mut g = initialize_designs(&space, 1, &mut r).unwrap().remove(0);
            for i in 0..3400 {
                g = disturb(&g, &space, &mut r, 1 + i % 3).unwrap();
                let report = validate_graph(&g, &space);
                assert!(report.is_valid(), "{report}");
            }
        }
    }

    #[test]
    fn every_move_kind_is_exercised() {
        let space = build_default_space(Encoding::Discrete);
        let mut seen = BTreeSet::new();
        let mut r = rng(5);
        let mut g = presets::two_pathway_example(Encoding::Discrete);
        for _ in 0..2000 {
            let moves = applicable_moves(&g, &space);
            let m = *moves.choose(&mut r).unwrap();
            seen.insert(format!("{m:?}"));
            apply_move(&mut g, &space, m, &mut r).unwrap();
            assert!(validate_graph(&g, &space).is_valid());
        }
        assert_eq!(seen.len(), 8, "{seen:?}");
    }

    #[test]
    fn fixed_topology_disturb_changes_one_param() {
        let fixed = presets::ris_designed();
        let space = build_default_space(Encoding::Discrete).with_fixed_topology(fixed.clone(), None);
        let mut r = rng(6);
        for _ in 0..500 {
            let g = disturb(&fixed, &space, &mut r, 1).unwrap();
            assert!(g.same_topology(&fixed));
            let changed: usize = g
                .vertices
                .iter()
                .zip(&fixed.vertices)
                .map(|(a, b)| a.component.params().iter().filter(|p| a.param(p.name) != b.param(p.name)).count())
                .sum();
            assert_eq!(changed, 1);
        }
    }

    #[test]
    fn strength_one_applies_one_move() {
        // one move adds at most one vertex or removes at most one branch
        let space = build_default_space(Encoding::Permutation);
        let mut r = rng(7);
        let g = presets::two_pathway_example(Encoding::Permutation);
        let longest = g.pathways().iter().map(Vec::len).max().unwrap();
        for _ in 0..500 {
            let h = disturb(&g, &space, &mut r, 1).unwrap();
            assert_ne!(h, g);
            let dv = h.vertices.len() as i64 - g.vertices.len() as i64;
            assert!((-(longest as i64)..=1).contains(&dv));
            assert!(h.pathway_count().abs_diff(g.pathway_count()) <= 1);
        }
    }
}
