//! Pseudocode listing of an algorithm graph.
//!
//! The frame is fixed: an `initialize` line, the `while` header, one line per
//! Choose/Search/Update vertex and `end while`. Parallel pathways are printed
//! as indented `branch` blocks followed by a `merge` line. Archives observe
//! the population and are not part of the listing.

use std::fmt::Write;

use crate::catalog::Role;
use crate::graph::{validate_structure, AlgorithmGraph, InvalidGraph, Vertex, VertexId};

const INDENT: &str = "    ";

pub fn render_pseudocode(graph: &AlgorithmGraph) -> Result<String, InvalidGraph> {
    let report = validate_structure(graph);
    if !report.is_valid() {
        return Err(InvalidGraph(report));
    }
    let mut r = Renderer { graph, lines: Vec::new(), fresh: 0 };
    r.lines.push("S = initialize()".to_string());
    r.lines.push("while stopping criterion not met".to_string());

    let choose = graph.vertex(graph.entry).expect("validated");
    r.push(1, format!("S = {}", call(choose, &["S"])));

    let children = r.flow_children(graph.entry);
    let leaves = if children.len() == 1 {
        r.block(children[0], "S", "S_new".to_string(), 1)
    } else {
        r.branches(&children, "S", 1)
    };
    let merged = if leaves.len() == 1 {
        leaves[0].clone()
    } else {
        r.push(1, format!("S_new = merge({})", leaves.join(", ")));
        "S_new".to_string()
    };
    let update = graph.vertex(graph.update_id().expect("validated")).expect("validated");
    r.push(1, format!("S = {}", call(update, &["S", &merged])));
    r.lines.push("end while".to_string());

    let mut out = String::new();
    for l in r.lines {
        writeln!(out, "{l}").unwrap();
    }
    Ok(out)
}

struct Renderer<'a> {
    graph: &'a AlgorithmGraph,
    lines: Vec<String>,
    fresh: usize,
}

impl Renderer<'_> {
    fn push(&mut self, depth: usize, line: String) {
        self.lines.push(format!("{}{line}", INDENT.repeat(depth)));
    }

    fn flow_children(&self, id: VertexId) -> Vec<VertexId> {
        let mut c: Vec<VertexId> = self
            .graph
            .successors(id)
            .into_iter()
            .filter(|s| self.graph.vertex(*s).is_some_and(|v| v.role() == Role::Search))
            .collect();
        c.sort_unstable();
        c
    }

    /// Emits a chain starting at `start`, writing into `var`. Returns the
    /// variables that reach the update vertex.
    fn block(&mut self, start: VertexId, input: &str, var: String, depth: usize) -> Vec<String> {
        let mut current = start;
        let mut input = input.to_string();
        loop {
            let v = self.graph.vertex(current).expect("validated");
            let mut line = format!("{var} = {}", call(v, &[&input]));
            if v.loop_count > 1 {
                write!(line, " \u{d7} {}", v.loop_count).unwrap();
            }
            self.push(depth, line);
            input = var.clone();
            let children = self.flow_children(current);
            match children.len() {
                0 => return vec![var],
                1 => current = children[0],
                _ => return self.branches(&children, &var, depth),
            }
        }
    }

    fn branches(&mut self, children: &[VertexId], input: &str, depth: usize) -> Vec<String> {
        let mut leaves = Vec::new();
        for (i, &c) in children.iter().enumerate() {
            self.push(depth, format!("branch {}:", i + 1));
            self.fresh += 1;
            let var = format!("S_{}", self.fresh);
            leaves.extend(self.block(c, input, var, depth + 1));
        }
        leaves
    }
}

fn call(v: &Vertex, args: &[&str]) -> String {
    let mut parts: Vec<String> = v
        .component
        .params()
        .iter()
        .filter_map(|p| v.params.get(p.name).map(|x| format!("{x}")))
        .collect();
    parts.extend(args.iter().map(|a| a.to_string()));
    format!("{}({})", v.component, parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Component, Encoding};
    use crate::presets;

    fn body(text: &str) -> Vec<&str> {
        let lines: Vec<&str> = text.lines().collect();
        lines[2..lines.len() - 1].iter().map(|l| l.trim()).collect()
    }

    #[test]
    fn stacking_graph_has_four_body_lines() {
        let text = render_pseudocode(&presets::stacking_designed()).unwrap();
        assert_eq!(
            body(&text),
            [
                "S = choose_roulette_wheel(S)",
                "S_new = cross_point_one(S)",
                "S_new = search_reset_rand(0.1342, S_new)",
                "S = update_round_robin(S, S_new)",
            ]
        );
    }

    #[test]
    fn minimal_graph_has_three_body_lines() {
        let g = AlgorithmGraph::chain(
            Encoding::Discrete,
            vec![
                Vertex::new(0, Component::ChooseTraverse),
                Vertex::new(0, Component::SearchResetOne),
                Vertex::new(0, Component::UpdatePairwise),
            ],
        );
        assert_eq!(body(&render_pseudocode(&g).unwrap()).len(), 3);
    }

    #[test]
    fn two_pathways_render_as_branches_then_merge() {
        let g = presets::two_pathway_example(Encoding::Discrete);
        let text = render_pseudocode(&g).unwrap();
        let b = body(&text);
        assert!(b.contains(&"branch 1:") && b.contains(&"branch 2:"), "{text}");
        let merge = b.iter().position(|l| l.starts_with("S_new = merge(")).unwrap();
        assert!(b[merge + 1].starts_with("S = update_"));
    }

    #[test]
    fn loop_count_is_shown() {
        let mut g = presets::ris_designed();
        g.vertex_mut(2).unwrap().loop_count = 3;
        let text = render_pseudocode(&g).unwrap();
        assert!(text.contains("search_reset_one(S_new) \u{d7} 3"), "{text}");
    }

    #[test]
    fn invalid_graph_is_refused() {
        let mut g = presets::ris_designed();
        g.edges.clear();
        assert!(render_pseudocode(&g).is_err());
    }
}
