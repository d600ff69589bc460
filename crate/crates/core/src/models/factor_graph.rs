use super::FactorModel;

/// Node of a factor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FgNode {
    Variable(usize),
    Factor(usize),
}

/// Bipartite graph between variables and the factors that mention them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    pub variables: Vec<String>,
    /// Scope of each factor as variable indices.
    pub factor_scopes: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn from_model<M: FactorModel + ?Sized>(model: &M) -> Self {
        FactorGraph {
            variables: model.variable_names().into_iter().map(String::from).collect(),
            factor_scopes: model.scope_indices(),
        }
    }

    /// Edges `(factor, variable)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.factor_scopes.iter().enumerate().flat_map(|(f, sc)| sc.iter().map(move |&v| (f, v))).collect()
    }

    pub fn neighbors(&self, node: FgNode) -> Vec<FgNode> {
        match node {
            FgNode::Factor(f) => self.factor_scopes[f].iter().map(|&v| FgNode::Variable(v)).collect(),
            FgNode::Variable(v) => self
                .factor_scopes
                .iter()
                .enumerate()
                .filter(|(_, sc)| sc.contains(&v))
                .map(|(f, _)| FgNode::Factor(f))
                .collect(),
        }
    }

    /// True when the graph has no cycles (each component is a tree).
    pub fn is_forest(&self) -> bool {
        let nodes = self.variables.len() + self.factor_scopes.len();
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (f, v) in self.edges() {
            let (a, b) = (find(&mut parent, self.variables.len() + f), find(&mut parent, v));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Breadth-first two-colouring; true iff no edge joins equal colours.
    pub fn is_bipartite(&self) -> bool {
        let nv = self.variables.len();
        let n = nv + self.factor_scopes.len();
        let mut adj = vec![Vec::new(); n];
        for (f, v) in self.edges() {
            adj[nv + f].push(v);
            adj[v].push(nv + f);
        }
        let mut colour = vec![None; n];
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(false);
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let c = colour[u].unwrap();
                for &w in &adj[u] {
                    match colour[w] {
                        None => {
                            colour[w] = Some(!c);
                            queue.push_back(w);
                        }
                        Some(d) if d == c => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in &self.variables {
            s.push_str(&format!("  {} [shape=ellipse];\n", crate::graph::quote(v)));
        }
        for f in 0..self.factor_scopes.len() {
            s.push_str(&format!("  \"f{f}\" [shape=box];\n"));
        }
        for (f, v) in self.edges() {
            s.push_str(&format!("  \"f{f}\" -- {};\n", crate::graph::quote(&self.variables[v])));
        }
        s.push_str("}\n");
        s
    }
}
