//! Directed-graph representation of an algorithm.
//!
//! A valid graph has one Choose vertex (the entry), one Update vertex, a tree
//! of Search vertices between them whose leaves all feed the Update vertex,
//! and optional Archive vertices hanging off the Update vertex. Each maximal
//! path from the entry to the Update vertex is a search pathway.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::catalog::{Component, Encoding, Role};
use crate::space::DesignSpace;

pub type VertexId = usize;

pub const MAX_LOOP_COUNT: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub component: Component,
    /// Explicit hyperparameter values; absent entries take the schema default.
    pub params: BTreeMap<String, f64>,
    /// Consecutive executions per iteration. Only Search vertices repeat.
    pub loop_count: u32,
}

impl Vertex {
    pub fn new(id: VertexId, component: Component) -> Self {
        Self { id, component, params: BTreeMap::new(), loop_count: 1 }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn role(&self) -> Role {
        self.component.role()
    }

    /// Value of `name`, falling back to the schema default.
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or_else(|| {
            self.component
                .param(name)
                .map(|p| p.default)
                .unwrap_or_else(|| panic!("{} has no parameter `{name}`", self.component))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmGraph {
    pub encoding: Encoding,
    pub entry: VertexId,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(VertexId, VertexId)>,
}

/// One structural or design-space violation found by [`validate_graph`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVertexId(VertexId),
    DuplicateEdge(VertexId, VertexId),
    DanglingEdge(VertexId, VertexId),
    SelfLoop(VertexId),
    EntryMissing(VertexId),
    EntryNotChoose(VertexId),
    ChooseCount(usize),
    MissingUpdate,
    MultipleUpdate(Vec<VertexId>),
    EdgeIntoChoose(VertexId, VertexId),
    IllegalEdge { from: VertexId, to: VertexId },
    SearchInDegree { vertex: VertexId, in_degree: usize },
    DeadEnd(VertexId),
    EmptyPathway,
    Cycle,
    Unreachable(VertexId),
    ArchiveNotOnUpdate(VertexId),
    EncodingMismatch { vertex: VertexId, component: Component },
    ComponentNotAllowed { vertex: VertexId, component: Component },
    UnknownParam { vertex: VertexId, name: String },
    ParamOutOfRange { vertex: VertexId, name: String, value: f64, lower: f64, upper: f64 },
    LoopCountOutOfRange { vertex: VertexId, loop_count: u32 },
    TooManySearchVertices { count: usize, max: usize },
    TooManyPathways { count: usize, max: usize },
    SpaceEncoding { graph: Encoding, space: Encoding },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateVertexId(id) => write!(f, "duplicate vertex id {id}"),
            DuplicateEdge(a, b) => write!(f, "duplicate edge {a}->{b}"),
            DanglingEdge(a, b) => write!(f, "dangling edge {a}->{b}"),
            SelfLoop(v) => write!(f, "self loop on vertex {v}"),
            EntryMissing(v) => write!(f, "entry vertex {v} does not exist"),
            EntryNotChoose(v) => write!(f, "entry vertex {v} is not a choose component"),
            ChooseCount(n) => write!(f, "expected exactly one choose vertex, found {n}"),
            MissingUpdate => write!(f, "missing update vertex"),
            MultipleUpdate(ids) => write!(f, "multiple update vertices {ids:?}"),
            EdgeIntoChoose(a, b) => write!(f, "edge {a}->{b} targets the choose vertex"),
            IllegalEdge { from, to } => write!(f, "illegal edge {from}->{to} for the vertex roles"),
            SearchInDegree { vertex, in_degree } => {
                write!(f, "search vertex {vertex} has {in_degree} predecessors, expected 1")
            }
            DeadEnd(v) => write!(f, "vertex {v} does not lead to the update vertex"),
            EmptyPathway => write!(f, "pathway without search vertices"),
            Cycle => write!(f, "cycle among choose/search/update vertices"),
            Unreachable(v) => write!(f, "vertex {v} is unreachable from the entry"),
            ArchiveNotOnUpdate(v) => {
                write!(f, "archive vertex {v} must hang off the update vertex only")
            }
            EncodingMismatch { vertex, component } => {
                write!(f, "encoding mismatch: vertex {vertex} uses {component}")
            }
            ComponentNotAllowed { vertex, component } => {
                write!(f, "vertex {vertex} uses {component}, not in the design space")
            }
            UnknownParam { vertex, name } => write!(f, "vertex {vertex} has unknown param `{name}`"),
            ParamOutOfRange { vertex, name, value, lower, upper } => write!(
                f,
                "vertex {vertex} param `{name}` = {value} outside [{lower}, {upper}]"
            ),
            LoopCountOutOfRange { vertex, loop_count } => {
                write!(f, "vertex {vertex} loop_count {loop_count} outside [1, {MAX_LOOP_COUNT}]")
            }
            TooManySearchVertices { count, max } => {
                write!(f, "{count} search vertices exceed the cap of {max}")
            }
            TooManyPathways { count, max } => write!(f, "{count} pathways exceed the cap of {max}"),
            SpaceEncoding { graph, space } => {
                write!(f, "graph encoding {graph} differs from design space encoding {space}")
            }
        }
    }
}

/// Result of [`validate_graph`]; an empty report means the graph is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid graph: {0}")]
pub struct InvalidGraph(pub ValidationReport);

impl AlgorithmGraph {
    /// Builds a single-pathway graph `choose -> search... -> update`, ids
    /// assigned in order from 0.
    pub fn chain(encoding: Encoding, vertices: Vec<Vertex>) -> Self {
        let vertices: Vec<Vertex> = vertices
            .into_iter()
            .enumerate()
            .map(|(i, mut v)| {
                v.id = i;
                v
            })
            .collect();
        let edges = (1..vertices.len()).map(|i| (i - 1, i)).collect();
        Self { encoding, entry: 0, vertices, edges }
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn vertex_mut(&mut self, id: VertexId) -> Option<&mut Vertex> {
        self.vertices.iter_mut().find(|v| v.id == id)
    }

    pub fn successors(&self, id: VertexId) -> Vec<VertexId> {
        self.edges.iter().filter(|e| e.0 == id).map(|e| e.1).collect()
    }

    pub fn predecessors(&self, id: VertexId) -> Vec<VertexId> {
        self.edges.iter().filter(|e| e.1 == id).map(|e| e.0).collect()
    }

    pub fn ids_with_role(&self, role: Role) -> Vec<VertexId> {
        self.vertices.iter().filter(|v| v.role() == role).map(|v| v.id).collect()
    }

    pub fn update_id(&self) -> Option<VertexId> {
        self.ids_with_role(Role::Update).first().copied()
    }

    pub fn search_count(&self) -> usize {
        self.ids_with_role(Role::Search).len()
    }

    /// Number of pathways, i.e. edges into the Update vertex.
    pub fn pathway_count(&self) -> usize {
        match self.update_id() {
            Some(u) => self.predecessors(u).len(),
            None => 0,
        }
    }

    /// Every maximal entry-to-update path as its list of Search vertex ids.
    pub fn pathways(&self) -> Vec<Vec<VertexId>> {
        let mut out = Vec::new();
        let mut stack = vec![(self.entry, Vec::new())];
        while let Some((v, path)) = stack.pop() {
            let mut succ: Vec<VertexId> = self
                .successors(v)
                .into_iter()
                .filter(|s| self.vertex(*s).map(|x| x.role() != Role::Archive).unwrap_or(false))
                .collect();
            succ.sort_unstable();
            for s in succ.into_iter().rev() {
                match self.vertex(s).map(|x| x.role()) {
                    Some(Role::Search) => {
                        let mut p = path.clone();
                        p.push(s);
                        stack.push((s, p));
                    }
                    Some(Role::Update) => out.push(path.clone()),
                    _ => {}
                }
            }
        }
        out
    }

    /// Choose, Search and Update vertices in topological order, ties broken by
    /// smaller id. `None` on a cycle.
    pub fn flow_order(&self) -> Option<Vec<VertexId>> {
        let flow: BTreeSet<VertexId> = self
            .vertices
            .iter()
            .filter(|v| v.role() != Role::Archive)
            .map(|v| v.id)
            .collect();
        let mut indeg: BTreeMap<VertexId, usize> = flow.iter().map(|&v| (v, 0)).collect();
        for &(a, b) in &self.edges {
            if flow.contains(&a) && flow.contains(&b) {
                *indeg.get_mut(&b).unwrap() += 1;
            }
        }
        let mut ready: BTreeSet<VertexId> =
            indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
        let mut order = Vec::with_capacity(flow.len());
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for s in self.successors(v) {
                if let Some(d) = indeg.get_mut(&s) {
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(s);
                    }
                }
            }
        }
        (order.len() == flow.len()).then_some(order)
    }

    pub fn next_vertex_id(&self) -> VertexId {
        self.vertices.iter().map(|v| v.id + 1).max().unwrap_or(0)
    }

    /// Sorts vertices by id and edges lexicographically.
    pub fn normalize(&mut self) {
        self.vertices.sort_by_key(|v| v.id);
        self.edges.sort_unstable();
    }

    /// True when both graphs have the same vertex ids, components, loop
    /// counts and edges; hyperparameter values may differ.
    pub fn same_topology(&self, other: &AlgorithmGraph) -> bool {
        let key = |g: &AlgorithmGraph| {
            let mut v: Vec<(VertexId, Component, u32)> =
                g.vertices.iter().map(|v| (v.id, v.component, v.loop_count)).collect();
            v.sort_unstable();
            let mut e = g.edges.clone();
            e.sort_unstable();
            (g.encoding, g.entry, v, e)
        };
        key(self) == key(other)
    }

    pub fn validate(&self, space: &DesignSpace) -> Result<(), InvalidGraph> {
        let report = validate_graph(self, space);
        if report.is_valid() {
            Ok(())
        } else {
            Err(InvalidGraph(report))
        }
    }
}

/// Lists every structural and design-space violation of `graph`.
pub fn validate_graph(graph: &AlgorithmGraph, space: &DesignSpace) -> ValidationReport {
    let mut out = Vec::new();
    structural_violations(graph, &mut out);
    space_violations(graph, space, &mut out);
    ValidationReport { violations: out }
}

/// Violations that do not depend on a design space (structure, encodings,
/// catalog ranges).
pub fn validate_structure(graph: &AlgorithmGraph) -> ValidationReport {
    let mut out = Vec::new();
    structural_violations(graph, &mut out);
    for v in &graph.vertices {
        param_violations(v, |_, s| (s.lower, s.upper), &mut out);
    }
    ValidationReport { violations: out }
}

fn structural_violations(g: &AlgorithmGraph, out: &mut Vec<Violation>) {
    let mut ids = BTreeSet::new();
    for v in &g.vertices {
        if !ids.insert(v.id) {
            out.push(Violation::DuplicateVertexId(v.id));
        }
    }
    let role_of: BTreeMap<VertexId, Role> = g.vertices.iter().map(|v| (v.id, v.role())).collect();

    let mut seen_edges = BTreeSet::new();
    let mut good_edges = Vec::new();
    for &(a, b) in &g.edges {
        if !seen_edges.insert((a, b)) {
            out.push(Violation::DuplicateEdge(a, b));
            continue;
        }
        let (Some(&ra), Some(&rb)) = (role_of.get(&a), role_of.get(&b)) else {
            out.push(Violation::DanglingEdge(a, b));
            continue;
        };
        if a == b {
            out.push(Violation::SelfLoop(a));
            continue;
        }
        if rb == Role::Choose {
            out.push(Violation::EdgeIntoChoose(a, b));
            continue;
        }
        let legal = matches!(
            (ra, rb),
            (Role::Choose, Role::Search)
                | (Role::Choose, Role::Update)
                | (Role::Search, Role::Search)
                | (Role::Search, Role::Update)
                | (Role::Update, Role::Archive)
        );
        if !legal {
            out.push(Violation::IllegalEdge { from: a, to: b });
            continue;
        }
        good_edges.push((a, b));
    }

    match role_of.get(&g.entry) {
        None => out.push(Violation::EntryMissing(g.entry)),
        Some(Role::Choose) => {}
        Some(_) => out.push(Violation::EntryNotChoose(g.entry)),
    }
    let chooses = g.ids_with_role(Role::Choose);
    if chooses.len() != 1 {
        out.push(Violation::ChooseCount(chooses.len()));
    }
    let updates = g.ids_with_role(Role::Update);
    match updates.len() {
        0 => out.push(Violation::MissingUpdate),
        1 => {}
        _ => out.push(Violation::MultipleUpdate(updates.clone())),
    }

    let succ = |v: VertexId| good_edges.iter().filter(move |e| e.0 == v).map(|e| e.1);
    let pred_count = |v: VertexId| good_edges.iter().filter(|e| e.1 == v).count();

    for v in &g.vertices {
        match v.role() {
            Role::Search => {
                let d = pred_count(v.id);
                if d != 1 {
                    out.push(Violation::SearchInDegree { vertex: v.id, in_degree: d });
                }
                if succ(v.id).next().is_none() {
                    out.push(Violation::DeadEnd(v.id));
                }
            }
            Role::Choose => {
                if succ(v.id).next().is_none() {
                    out.push(Violation::DeadEnd(v.id));
                }
                if succ(v.id).any(|s| role_of.get(&s) == Some(&Role::Update)) {
                    out.push(Violation::EmptyPathway);
                }
            }
            Role::Archive => {
                let preds: Vec<_> = good_edges.iter().filter(|e| e.1 == v.id).collect();
                let ok = preds.len() == 1 && role_of.get(&preds[0].0) == Some(&Role::Update);
                if !ok {
                    out.push(Violation::ArchiveNotOnUpdate(v.id));
                }
            }
            Role::Update => {}
        }
        let repeats = v.loop_count >= 1 && v.loop_count <= MAX_LOOP_COUNT;
        let fixed_once = v.role() == Role::Search || v.loop_count == 1;
        if !repeats || !fixed_once {
            out.push(Violation::LoopCountOutOfRange { vertex: v.id, loop_count: v.loop_count });
        }
        if v.role() == Role::Search && !v.component.supports(g.encoding) {
            out.push(Violation::EncodingMismatch { vertex: v.id, component: v.component });
        }
    }

    if g.flow_order().is_none() {
        out.push(Violation::Cycle);
    }

    if role_of.contains_key(&g.entry) {
        let mut reach = BTreeSet::from([g.entry]);
        let mut queue = VecDeque::from([g.entry]);
        while let Some(v) = queue.pop_front() {
            for s in succ(v) {
                if reach.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        for v in &g.vertices {
            if !reach.contains(&v.id) {
                out.push(Violation::Unreachable(v.id));
            }
        }
    }
}

fn param_violations(
    v: &Vertex,
    range: impl Fn(Component, &crate::catalog::HyperparamSchema) -> (f64, f64),
    out: &mut Vec<Violation>,
) {
    for (name, &value) in &v.params {
        match v.component.param(name) {
            None => out.push(Violation::UnknownParam { vertex: v.id, name: name.clone() }),
            Some(schema) => {
                let (lower, upper) = range(v.component, schema);
                if !(value >= lower && value <= upper) {
                    out.push(Violation::ParamOutOfRange {
                        vertex: v.id,
                        name: name.clone(),
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
    }
}

fn space_violations(g: &AlgorithmGraph, space: &DesignSpace, out: &mut Vec<Violation>) {
    if g.encoding != space.encoding {
        out.push(Violation::SpaceEncoding { graph: g.encoding, space: space.encoding });
    }
    for v in &g.vertices {
        if !space.allows(v.component) {
            out.push(Violation::ComponentNotAllowed { vertex: v.id, component: v.component });
        }
        param_violations(v, |c, s| space.param_range(c, s.name), out);
    }
    let searches = g.search_count();
    if searches > space.max_search_vertices {
        out.push(Violation::TooManySearchVertices { count: searches, max: space.max_search_vertices });
    }
    let paths = g.pathway_count();
    if paths > space.max_pathways {
        out.push(Violation::TooManyPathways { count: paths, max: space.max_pathways });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::space::build_default_space;

    #[test]
    fn ris_designed_graph_is_valid() {
        let g = presets::ris_designed();
        let space = build_default_space(Encoding::Discrete);
        assert_eq!(validate_graph(&g, &space), ValidationReport::default());
    }

    #[test]
    fn two_update_vertices_is_one_violation() {
        let mut g = presets::ris_designed();
        let id = g.next_vertex_id();
        g.vertices.push(Vertex::new(id, Component::UpdateGreedy));
        g.edges.push((2, id));
        let report = validate_graph(&g, &build_default_space(Encoding::Discrete));
        assert_eq!(report.violations.len(), 1, "{report}");
        assert!(matches!(report.violations[0], Violation::MultipleUpdate(_)));
        assert!(report.to_string().contains("multiple update vertices"));
    }

    #[test]
    fn continuous_component_in_discrete_space_is_encoding_mismatch() {
        let mut g = presets::ris_designed();
        // cross_sim_binary is continuous only
        g.vertex_mut(1).unwrap().component = Component::CrossSimBinary;
        g.vertex_mut(1).unwrap().params.clear();
        let mut space = build_default_space(Encoding::Discrete);
        space.allowed.get_mut(&Role::Search).unwrap().insert(Component::CrossSimBinary);
        let report = validate_graph(&g, &space);
        assert_eq!(report.violations.len(), 1, "{report}");
        assert!(report.to_string().contains("encoding mismatch"));
    }

    #[test]
    fn pathways_of_two_branch_graph() {
        let g = presets::two_pathway_example(Encoding::Permutation);
        assert_eq!(g.pathway_count(), 2);
        assert_eq!(g.pathways().len(), 2);
        assert!(validate_graph(&g, &build_default_space(Encoding::Permutation)).is_valid());
    }

    #[test]
    fn back_edge_is_reported() {
        let mut g = presets::ris_designed();
        g.edges.push((2, 1));
        let report = validate_graph(&g, &build_default_space(Encoding::Discrete));
        assert!(report.violations.contains(&Violation::Cycle));
    }

    #[test]
    fn direct_choose_to_update_is_empty_pathway() {
        let mut g = presets::ris_designed();
        g.edges.push((0, 3));
        let report = validate_graph(&g, &build_default_space(Encoding::Discrete));
        assert!(report.violations.contains(&Violation::EmptyPathway));
    }

    #[test]
    fn param_out_of_range() {
        let mut g = presets::ris_designed();
        g.vertex_mut(1).unwrap().params.insert("rate".into(), 1.5);
        let report = validate_graph(&g, &build_default_space(Encoding::Discrete));
        assert!(matches!(report.violations[..], [Violation::ParamOutOfRange { .. }]));
    }
}
