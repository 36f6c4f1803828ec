//! Design spaces: which components may appear per role, their hyperparameter
//! ranges and the topology caps.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{Component, Encoding, Role};
use crate::graph::{validate_graph, AlgorithmGraph, InvalidGraph, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    pub encoding: Encoding,
    pub allowed: BTreeMap<Role, BTreeSet<Component>>,
    /// Overrides of catalog ranges, keyed by (component, param name).
    pub param_ranges: BTreeMap<(Component, String), (f64, f64)>,
    pub max_search_vertices: usize,
    pub max_pathways: usize,
    /// When set, only hyperparameters are tunable.
    pub fixed_topology: Option<AlgorithmGraph>,
    /// Restricts which (vertex, param) pairs vary in fixed-topology mode.
    pub tunable_params: Option<BTreeSet<(VertexId, String)>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("design space has no allowed {0:?} component")]
    EmptyRole(Role),
    #[error("fixed topology does not fit the design space: {0}")]
    FixedTopology(#[from] InvalidGraph),
    #[error("topology caps must be at least 1")]
    Caps,
}

/// The default space for `encoding`: every catalog component applicable to
/// it, catalog ranges, at most 3 search vertices in at most 2 pathways.
pub fn build_default_space(encoding: Encoding) -> DesignSpace {
    let allowed = [Role::Choose, Role::Search, Role::Update, Role::Archive]
        .into_iter()
        .map(|r| (r, Component::of_role(r, encoding).into_iter().collect()))
        .collect();
    let param_ranges = Component::ALL
        .iter()
        .filter(|c| c.supports(encoding))
        .flat_map(|&c| c.params().iter().map(move |p| ((c, p.name.to_string()), (p.lower, p.upper))))
        .collect();
    DesignSpace {
        encoding,
        allowed,
        param_ranges,
        max_search_vertices: 3,
        max_pathways: 2,
        fixed_topology: None,
        tunable_params: None,
    }
}

impl DesignSpace {
    pub fn allows(&self, c: Component) -> bool {
        self.allowed.get(&c.role()).is_some_and(|s| s.contains(&c))
    }

    pub fn components(&self, role: Role) -> Vec<Component> {
        self.allowed.get(&role).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    pub fn param_range(&self, c: Component, name: &str) -> (f64, f64) {
        if let Some(&r) = self.param_ranges.get(&(c, name.to_string())) {
            return r;
        }
        let s = c.param(name).unwrap_or_else(|| panic!("{c} has no parameter `{name}`"));
        (s.lower, s.upper)
    }

    /// Restricts the space to hyperparameter tuning of `graph`.
    pub fn with_fixed_topology(
        mut self,
        graph: AlgorithmGraph,
        tunable: Option<BTreeSet<(VertexId, String)>>,
    ) -> Self {
        self.fixed_topology = Some(graph);
        self.tunable_params = tunable;
        self
    }

    pub fn check(&self) -> Result<(), SpaceError> {
        for role in [Role::Choose, Role::Search, Role::Update] {
            if self.allowed.get(&role).is_none_or(|s| s.is_empty()) {
                return Err(SpaceError::EmptyRole(role));
            }
        }
        if self.max_search_vertices == 0 || self.max_pathways == 0 {
            return Err(SpaceError::Caps);
        }
        if let Some(g) = &self.fixed_topology {
            let report = validate_graph(g, self);
            if !report.is_valid() {
                return Err(InvalidGraph(report).into());
            }
        }
        Ok(())
    }

    /// The (vertex, param) pairs of `graph` that may vary.
    pub fn tunable_slots(&self, graph: &AlgorithmGraph) -> Vec<(VertexId, String)> {
        let mut slots = Vec::new();
        for v in &graph.vertices {
            for p in v.component.params() {
                let key = (v.id, p.name.to_string());
                let ok = match (&self.fixed_topology, &self.tunable_params) {
                    (Some(_), Some(set)) => set.contains(&key),
                    _ => true,
                };
                if ok {
                    let (lo, hi) = self.param_range(v.component, p.name);
                    if hi > lo {
                        slots.push(key);
                    }
                }
            }
        }
        slots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_default_search_set() {
        let s = build_default_space(Encoding::Discrete);
        let search = &s.allowed[&Role::Search];
        for name in [
            "cross_point_one",
            "cross_point_two",
            "cross_point_n",
            "cross_point_uniform",
            "search_reset_one",
            "search_reset_rand",
            "search_reset_creep",
            "reinit_discrete",
        ] {
            assert!(search.contains(&name.parse().unwrap()), "{name}");
        }
    }

    #[test]
    fn permutation_space_has_no_continuous_crossover() {
        let s = build_default_space(Encoding::Permutation);
        assert!(!s.allowed[&Role::Search].contains(&Component::CrossArithmetic));
    }

    #[test]
    fn continuous_choose_and_update_counts() {
        let s = build_default_space(Encoding::Continuous);
        assert_eq!(s.allowed[&Role::Choose].len(), 5);
        assert_eq!(s.allowed[&Role::Update].len(), 5);
        assert_eq!(s.allowed[&Role::Archive].len(), 3);
        assert!(s.check().is_ok());
    }

    #[test]
    fn empty_role_is_rejected() {
        let mut s = build_default_space(Encoding::Continuous);
        s.allowed.get_mut(&Role::Update).unwrap().clear();
        assert_eq!(s.check(), Err(SpaceError::EmptyRole(Role::Update)));
    }
}
