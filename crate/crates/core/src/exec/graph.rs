use std::collections::BTreeSet;

use crate::model::{FairWorkflow, ModelError, Source};

/// Step dependency graph: data-flow edges plus explicit ordering edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<String>,
    // (from, to) indices into `nodes`, deduplicated and sorted
    edges: BTreeSet<(usize, usize)>,
}

impl DependencyGraph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        let Some(idx) = self.nodes.iter().position(|n| n == id) else {
            return Vec::new();
        };
        self.edges.iter().filter(|(_, b)| *b == idx).map(|&(a, _)| self.nodes[a].as_str()).collect()
    }

    /// Kahn's algorithm; among ready nodes the earliest declared runs first.
    pub fn topological_order(&self) -> Vec<&str> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for &(_, b) in &self.edges {
            indegree[b] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(self.nodes[i].as_str());
            for &(_, b) in self.edges.range((i, 0)..(i + 1, 0)) {
                indegree[b] -= 1;
                if indegree[b] == 0 {
                    ready.insert(b);
                }
            }
        }
        order
    }

    fn find_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        let mut mark = vec![Mark::New; n];
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // explicit stack of (node, next child index)
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Active;
            while let Some(&mut (node, ref mut child)) = stack.last_mut() {
                if let Some(&next) = adj[node].get(*child) {
                    *child += 1;
                    match mark[next] {
                        Mark::New => {
                            mark[next] = Mark::Active;
                            stack.push((next, 0));
                        }
                        Mark::Active => {
                            let start = stack.iter().position(|(v, _)| *v == next).unwrap_or(0);
                            let mut cycle: Vec<String> = stack[start..].iter().map(|(v, _)| self.nodes[*v].clone()).collect();
                            cycle.push(self.nodes[next].clone());
                            return Some(cycle);
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[node] = Mark::Done;
                    stack.pop();
                }
            }
        }
        None
    }
}

/// Builds the call graph of `w`, rejecting unknown references and cycles.
pub fn build_graph(w: &FairWorkflow) -> Result<DependencyGraph, ModelError> {
    let nodes: Vec<String> = w.steps.keys().cloned().collect();
    let index = |id: &str| w.steps.get_index_of(id).ok_or_else(|| ModelError::UnknownStep(id.to_string()));
    let mut edges = BTreeSet::new();
    for ((to, _), source) in &w.bindings {
        if let Source::StepOutput { step: from, .. } = source {
            edges.insert((index(from)?, index(to)?));
        }
    }
    for (to, preds) in &w.after {
        for from in preds {
            edges.insert((index(from)?, index(to)?));
        }
    }
    let graph = DependencyGraph { nodes, edges };
    match graph.find_cycle() {
        Some(cycle) => Err(ModelError::Cycle(cycle)),
        None => Ok(graph),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FairStep, Variable};

    fn wf(edges: &[(&str, &str)], nodes: &[&str]) -> FairWorkflow {
        let mut w = FairWorkflow::new("g");
        for n in nodes {
            w.add_step(*n, FairStep::new(*n, "builtin:identity").with_output(Variable::new("out")));
        }
        for (i, (from, to)) in edges.iter().enumerate() {
            let input = format!("i{i}");
            w.steps.get_mut(*to).unwrap().inputs.push(Variable::new(&input));
            w.bind(to, &input, Source::StepOutput { step: from.to_string(), output: "out".into() });
        }
        w
    }

    #[test]
    fn linear() {
        let g = build_graph(&wf(&[("A", "B"), ("B", "C")], &["A", "B", "C"])).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![("A", "B"), ("B", "C")]);
        assert_eq!(g.topological_order(), vec!["A", "B", "C"]);
    }

    #[test]
    fn diamond() {
        let g = build_graph(&wf(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], &["A", "B", "C", "D"])).unwrap();
        assert_eq!(g.edge_count(), 4);
        let order = g.topological_order();
        assert_eq!(order.first(), Some(&"A"));
        assert_eq!(order.last(), Some(&"D"));
        assert_eq!(g.predecessors("D"), vec!["B", "C"]);
    }

    #[test]
    fn declaration_order_breaks_ties() {
        let g = build_graph(&wf(&[], &["z", "a", "m"])).unwrap();
        assert_eq!(g.topological_order(), vec!["z", "a", "m"]);
    }

    #[test]
    fn self_binding_is_a_cycle() {
        let err = build_graph(&wf(&[("s1", "s1")], &["s1"])).unwrap_err();
        assert_eq!(err.to_string(), "cycle: s1→s1");
    }

    #[test]
    fn longer_cycle_is_named() {
        let err = build_graph(&wf(&[("s1", "s2"), ("s2", "s3"), ("s3", "s1")], &["s1", "s2", "s3"])).unwrap_err();
        let ModelError::Cycle(c) = err else { panic!() };
        assert_eq!(c.first(), c.last());
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn after_edges_count() {
        let mut w = wf(&[], &["a", "b"]);
        w.after.entry("b".into()).or_default().insert("a".into());
        assert_eq!(build_graph(&w).unwrap().edges().collect::<Vec<_>>(), vec![("a", "b")]);
        w.after.entry("a".into()).or_default().insert("b".into());
        assert!(build_graph(&w).is_err());
    }
}
