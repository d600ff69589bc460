use std::collections::{BTreeSet, HashMap, VecDeque};

use super::UndirectedGraph;
use crate::error::{Error, Result};

/// Directed graph without self-loops or parallel edges. Acyclicity is checked, not assumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

/// Skeleton plus v-structures; two DAGs are Markov equivalent iff their signatures are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MecSignature {
    pub skeleton: UndirectedGraph,
    /// Triples `(a, c, b)` with `a -> c <- b`, `a < b`, and `a`, `b` non-adjacent.
    pub v_structures: BTreeSet<(String, String, String)>,
}

impl DirectedGraph {
    pub fn new<S: AsRef<str>>(nodes: impl IntoIterator<Item = S>) -> Self {
        let mut names: Vec<String> = nodes.into_iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let n = names.len();
        DirectedGraph { names, index, parents: vec![BTreeSet::new(); n], children: vec![BTreeSet::new(); n] }
    }

    pub fn from_edges<S: AsRef<str>>(nodes: impl IntoIterator<Item = S>, edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = Self::new(nodes);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::Lookup(name.to_string()))
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let (i, j) = (self.index(from)?, self.index(to)?);
        self.add_edge_idx(i, j)
    }

    pub fn add_edge_idx(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::Argument(format!("self-loop on `{}`", self.names[i])));
        }
        if !self.children[i].insert(j) {
            return Err(Error::Argument(format!("duplicate edge {} -> {}", self.names[i], self.names[j])));
        }
        self.parents[j].insert(i);
        Ok(())
    }

    pub fn remove_edge_idx(&mut self, i: usize, j: usize) -> bool {
        self.parents[j].remove(&i);
        self.children[i].remove(&j)
    }

    pub fn remove_edge(&mut self, from: &str, to: &str) -> Result<bool> {
        let (i, j) = (self.index(from)?, self.index(to)?);
        Ok(self.remove_edge_idx(i, j))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&i), Some(&j)) => self.children[i].contains(&j),
            _ => false,
        }
    }

    pub fn has_edge_idx(&self, i: usize, j: usize) -> bool {
        self.children[i].contains(&j)
    }

    pub fn parents_idx(&self, i: usize) -> &BTreeSet<usize> {
        &self.parents[i]
    }

    pub fn children_idx(&self, i: usize) -> &BTreeSet<usize> {
        &self.children[i]
    }

    pub fn parents(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index(name)?;
        Ok(self.parents[i].iter().map(|&p| self.name(p)).collect())
    }

    pub fn children(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index(name)?;
        Ok(self.children[i].iter().map(|&c| self.name(c)).collect())
    }

    /// Edges `(parent, child)` in lexicographic order.
    pub fn edges_idx(&self) -> Vec<(usize, usize)> {
        self.children.iter().enumerate().flat_map(|(i, cs)| cs.iter().map(move |&j| (i, j))).collect()
    }

    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.edges_idx().into_iter().map(|(i, j)| (self.name(i), self.name(j))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(BTreeSet::len).sum()
    }

    /// Kahn's algorithm taking the name-least ready node first.
    pub fn topological_sort(&self) -> Result<Vec<String>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut out = Vec::with_capacity(self.len());
        while let Some(u) = ready.pop_first() {
            out.push(u);
            for &c in &self.children[u] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if out.len() < self.len() {
            return Err(Error::NotADag(self.find_cycle().unwrap_or_default()));
        }
        Ok(out.into_iter().map(|i| self.names[i].clone()).collect())
    }

    pub fn topological_order_idx(&self) -> Result<Vec<usize>> {
        Ok(self.topological_sort()?.iter().map(|n| self.index[n]).collect())
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// One directed cycle, listed from its name-least node and closed back on it.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        // 0 = unvisited, 1 = on stack, 2 = finished
        let mut color = vec![0u8; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(g: &DirectedGraph, u: usize, color: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            color[u] = 1;
            stack.push(u);
            for &v in &g.children[u] {
                if color[v] == 1 {
                    let start = stack.iter().position(|&x| x == v).unwrap();
                    return Some(stack[start..].to_vec());
                }
                if color[v] == 0 {
                    if let Some(c) = dfs(g, v, color, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            color[u] = 2;
            None
        }
        for s in 0..self.len() {
            if color[s] == 0 {
                if let Some(mut cyc) = dfs(self, s, &mut color, &mut stack) {
                    let m = (0..cyc.len()).min_by_key(|&k| cyc[k]).unwrap();
                    cyc.rotate_left(m);
                    cyc.push(cyc[0]);
                    return Some(cyc.into_iter().map(|i| self.names[i].clone()).collect());
                }
            }
        }
        None
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.names.iter());
        for (i, j) in self.edges_idx() {
            g.add_edge_idx(i, j).expect("no self-loops");
        }
        g
    }

    /// Skeleton plus an edge between every pair of parents sharing a child.
    pub fn moralize(&self) -> Result<UndirectedGraph> {
        if let Some(c) = self.find_cycle() {
            return Err(Error::NotADag(c));
        }
        let mut g = self.skeleton();
        for ps in &self.parents {
            let ps: Vec<usize> = ps.iter().copied().collect();
            for (a, &x) in ps.iter().enumerate() {
                for &y in &ps[a + 1..] {
                    g.add_edge_idx(x, y)?;
                }
            }
        }
        Ok(g)
    }

    fn closure(&self, start: &BTreeSet<usize>, next: &[BTreeSet<usize>]) -> BTreeSet<usize> {
        let mut seen = start.clone();
        let mut queue: VecDeque<usize> = start.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            for &v in &next[u] {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Ancestors of the set, including the set itself.
    pub fn ancestors_idx(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.closure(set, &self.parents)
    }

    /// Descendants of the set, including the set itself.
    pub fn descendants_idx(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.closure(set, &self.children)
    }

    fn index_set(&self, names: &[&str]) -> Result<BTreeSet<usize>> {
        names.iter().map(|n| self.index(n)).collect()
    }

    /// d-separation of `x` and `y` given `z`, by reachability over (node, direction) states.
    pub fn d_separated(&self, x: &[&str], y: &[&str], z: &[&str]) -> Result<bool> {
        let (xs, ys, zs) = (self.index_set(x)?, self.index_set(y)?, self.index_set(z)?);
        self.d_separated_idx(&xs, &ys, &zs)
    }

    pub fn d_separated_idx(&self, xs: &BTreeSet<usize>, ys: &BTreeSet<usize>, zs: &BTreeSet<usize>) -> Result<bool> {
        if !xs.is_disjoint(ys) || !xs.is_disjoint(zs) || !ys.is_disjoint(zs) {
            return Err(Error::Argument("d-separation sets must be disjoint".into()));
        }
        let anc = self.ancestors_idx(zs);
        // direction: true = arrived from a child (moving up), false = arrived from a parent
        let mut visited: BTreeSet<(usize, bool)> = BTreeSet::new();
        let mut queue: VecDeque<(usize, bool)> = xs.iter().map(|&v| (v, true)).collect();
        while let Some((v, up)) = queue.pop_front() {
            if !visited.insert((v, up)) {
                continue;
            }
            let observed = zs.contains(&v);
            if !observed && ys.contains(&v) {
                return Ok(false);
            }
            if up {
                if !observed {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
            } else {
                if !observed {
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
                if anc.contains(&v) {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                }
            }
        }
        Ok(true)
    }

    /// Parents, children and the children's other parents.
    pub fn markov_blanket(&self, name: &str) -> Result<BTreeSet<String>> {
        let v = self.index(name)?;
        let mut out: BTreeSet<usize> = self.parents[v].clone();
        for &c in &self.children[v] {
            out.insert(c);
            out.extend(self.parents[c].iter().copied());
        }
        out.remove(&v);
        Ok(out.into_iter().map(|i| self.names[i].clone()).collect())
    }

    pub fn v_structures(&self) -> BTreeSet<(String, String, String)> {
        let mut out = BTreeSet::new();
        for c in 0..self.len() {
            let ps: Vec<usize> = self.parents[c].iter().copied().collect();
            for (k, &a) in ps.iter().enumerate() {
                for &b in &ps[k + 1..] {
                    if !self.has_edge_idx(a, b) && !self.has_edge_idx(b, a) {
                        out.insert((self.names[a].clone(), self.names[c].clone(), self.names[b].clone()));
                    }
                }
            }
        }
        out
    }

    pub fn mec_signature(&self) -> MecSignature {
        MecSignature { skeleton: self.skeleton(), v_structures: self.v_structures() }
    }

    pub fn mec_equivalent(&self, other: &DirectedGraph) -> bool {
        self.mec_signature() == other.mec_signature()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for n in &self.names {
            s.push_str(&format!("  {};\n", super::quote(n)));
        }
        for (a, b) in self.edges() {
            s.push_str(&format!("  {} -> {};\n", super::quote(a), super::quote(b)));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(nodes: &[&str], edges: &[(&str, &str)]) -> DirectedGraph {
        DirectedGraph::from_edges(nodes.iter(), edges).unwrap()
    }

    #[test]
    fn topological_figure() {
        let g = dag(&["U", "V", "W", "X"], &[("U", "V"), ("U", "W"), ("W", "X")]);
        assert_eq!(g.topological_sort().unwrap(), vec!["U", "V", "W", "X"]);
    }

    #[test]
    fn cycle_is_reported() {
        let g = dag(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]);
        match g.topological_sort() {
            Err(Error::NotADag(c)) => assert_eq!(c, vec!["a", "b", "c", "a"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moral_graph_figure() {
        let g = dag(
            &["A", "B", "C", "D", "E", "F", "G"],
            &[("A", "D"), ("B", "D"), ("C", "D"), ("D", "G"), ("E", "G"), ("E", "F")],
        );
        let m = g.moralize().unwrap();
        for (a, b) in [("A", "B"), ("A", "C"), ("B", "C"), ("D", "E")] {
            assert!(m.has_edge(a, b));
        }
        assert_eq!(m.edge_count(), 10);
    }

    #[test]
    fn earthquake_v_structure() {
        let g = dag(&["Alarm", "Burglary", "Earthquake"], &[("Burglary", "Alarm"), ("Earthquake", "Alarm")]);
        assert!(g.d_separated(&["Burglary"], &["Earthquake"], &[]).unwrap());
        assert!(!g.d_separated(&["Burglary"], &["Earthquake"], &["Alarm"]).unwrap());
        assert!(g.d_separated(&["Burglary"], &["Alarm"], &["Alarm"]).is_err());
    }

    #[test]
    fn markov_blanket_figure() {
        let g = dag(
            &["A", "B", "C", "D", "E", "F", "G"],
            &[("A", "C"), ("C", "E"), ("C", "F"), ("B", "D"), ("D", "F"), ("D", "G")],
        );
        let mb: Vec<String> = g.markov_blanket("C").unwrap().into_iter().collect();
        assert_eq!(mb, vec!["A", "D", "E", "F"]);
    }

    #[test]
    fn mec_examples() {
        let fork = dag(&["X", "Y", "Z"], &[("Z", "X"), ("Z", "Y")]);
        let chain = dag(&["X", "Y", "Z"], &[("X", "Z"), ("Z", "Y")]);
        let collider = dag(&["X", "Y", "Z"], &[("X", "Z"), ("Y", "Z")]);
        assert!(fork.mec_equivalent(&chain));
        assert!(!fork.mec_equivalent(&collider));
        assert!(dag(&["X", "Y"], &[("X", "Y")]).mec_equivalent(&dag(&["X", "Y"], &[("Y", "X")])));
    }
}
