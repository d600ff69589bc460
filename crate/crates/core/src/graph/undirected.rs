use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Simple undirected graph. Nodes are kept sorted by name, so index order is name order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<BTreeSet<usize>>,
}

/// Result of Kruskal's algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub tree: UndirectedGraph,
    pub total_weight: f64,
    /// False when the input was disconnected and a forest was returned.
    pub connected: bool,
}

impl UndirectedGraph {
    pub fn new<S: AsRef<str>>(nodes: impl IntoIterator<Item = S>) -> Self {
        let mut names: Vec<String> = nodes.into_iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let adj = vec![BTreeSet::new(); names.len()];
        UndirectedGraph { names, index, adj }
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

    /// Add an edge; adding an existing edge is a no-op.
    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        self.add_edge_idx(i, j)
    }

    pub fn add_edge_idx(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::Argument(format!("self-loop on `{}`", self.names[i])));
        }
        self.adj[i].insert(j);
        self.adj[j].insert(i);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        self.adj[i].remove(&j);
        self.adj[j].remove(&i);
        Ok(())
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.adj[i].contains(&j),
            _ => false,
        }
    }

    pub fn has_edge_idx(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    pub fn neighbors_idx(&self, i: usize) -> &BTreeSet<usize> {
        &self.adj[i]
    }

    pub fn neighbors(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index(name)?;
        Ok(self.adj[i].iter().map(|&j| self.names[j].as_str()).collect())
    }

    /// Same as `neighbors`; the Markov blanket of a node in an undirected graph.
    pub fn markov_blanket(&self, name: &str) -> Result<BTreeSet<String>> {
        Ok(self.neighbors(name)?.into_iter().map(String::from).collect())
    }

    /// Edges as index pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges_idx(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nb) in self.adj.iter().enumerate() {
            for &j in nb.range(i + 1..) {
                out.push((i, j));
            }
        }
        out
    }

    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.edges_idx().into_iter().map(|(i, j)| (self.name(i), self.name(j))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// True if every pair of the given nodes is adjacent.
    pub fn is_clique_idx(&self, nodes: &[usize]) -> bool {
        nodes.iter().enumerate().all(|(k, &i)| nodes[k + 1..].iter().all(|&j| self.adj[i].contains(&j)))
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                k += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.len().max(1)
    }

    /// Eliminate nodes in `ordering`, adding fill edges.
    ///
    /// Returns the chordal supergraph and, for each eliminated node, the node
    /// together with its not-yet-eliminated neighbours.
    pub fn triangulate(&self, ordering: &[&str]) -> Result<(UndirectedGraph, Vec<Vec<String>>)> {
        let mut pos = vec![usize::MAX; self.len()];
        for (k, name) in ordering.iter().enumerate() {
            let i = self.index(name).map_err(|_| Error::Ordering(format!("unknown node `{name}`")))?;
            if pos[i] != usize::MAX {
                return Err(Error::Ordering(format!("`{name}` appears twice")));
            }
            pos[i] = k;
        }
        if ordering.len() != self.len() {
            return Err(Error::Ordering("ordering is not a permutation of the nodes".into()));
        }
        let mut chordal = self.clone();
        let mut work = self.adj.clone();
        let mut cliques = Vec::with_capacity(self.len());
        for name in ordering {
            let v = self.index[*name];
            let nb: Vec<usize> = work[v].iter().copied().collect();
            for (a, &x) in nb.iter().enumerate() {
                for &y in &nb[a + 1..] {
                    if work[x].insert(y) {
                        work[y].insert(x);
                        chordal.add_edge_idx(x, y)?;
                    }
                }
            }
            for &x in &nb {
                work[x].remove(&v);
            }
            let mut clique: Vec<usize> = nb;
            clique.push(v);
            clique.sort_unstable();
            cliques.push(clique.into_iter().map(|i| self.names[i].clone()).collect());
        }
        Ok((chordal, cliques))
    }

    /// Check chordality by maximum cardinality search.
    pub fn is_chordal(&self) -> bool {
        let n = self.len();
        let mut weight = vec![0usize; n];
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let v = (0..n).filter(|&v| !done[v]).max_by_key(|&v| (weight[v], std::cmp::Reverse(v))).unwrap();
            done[v] = true;
            order.push(v);
            for &u in &self.adj[v] {
                if !done[u] {
                    weight[u] += 1;
                }
            }
        }
        // reverse of MCS order is a perfect elimination ordering iff chordal
        let mut pos = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        for &v in &order {
            let earlier: Vec<usize> = self.adj[v].iter().copied().filter(|&u| pos[u] < pos[v]).collect();
            if let Some(&p) = earlier.iter().max_by_key(|&&u| pos[u]) {
                if earlier.iter().any(|&u| u != p && !self.adj[p].contains(&u)) {
                    return false;
                }
            }
        }
        true
    }

    /// Kruskal's maximum-weight spanning tree; ties go to the lexicographically smaller edge.
    pub fn max_weight_spanning_tree(&self, weight: impl Fn(&str, &str) -> f64) -> SpanningTree {
        let mut edges: Vec<(usize, usize, f64)> =
            self.edges_idx().into_iter().map(|(i, j)| (i, j, weight(self.name(i), self.name(j)))).collect();
        edges.sort_by(|a, b| b.2.total_cmp(&a.2));
        let mut parent: Vec<usize> = (0..self.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut tree = UndirectedGraph::new(self.names.iter());
        let mut total = 0.0;
        for (i, j, w) in edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                tree.adj[i].insert(j);
                tree.adj[j].insert(i);
                total += w;
            }
        }
        let connected = tree.is_connected();
        SpanningTree { tree, total_weight: total, connected }
    }

    /// All maximal cliques (Bron-Kerbosch with pivoting), sorted.
    pub fn maximal_cliques(&self) -> Vec<Vec<String>> {
        fn bk(g: &UndirectedGraph, r: &mut Vec<usize>, p: BTreeSet<usize>, mut x: BTreeSet<usize>, out: &mut Vec<Vec<usize>>) {
            if p.is_empty() && x.is_empty() {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(c);
                return;
            }
            let pivot = p.iter().chain(x.iter()).copied().max_by_key(|&u| g.adj[u].intersection(&p).count()).unwrap();
            let cands: Vec<usize> = p.iter().copied().filter(|v| !g.adj[pivot].contains(v)).collect();
            let mut p = p;
            for v in cands {
                r.push(v);
                let np = p.intersection(&g.adj[v]).copied().collect();
                let nx = x.intersection(&g.adj[v]).copied().collect();
                bk(g, r, np, nx, out);
                r.pop();
                p.remove(&v);
                x.insert(v);
            }
        }
        let mut out = Vec::new();
        if self.is_empty() {
            return Vec::new();
        }
        bk(self, &mut Vec::new(), (0..self.len()).collect(), BTreeSet::new(), &mut out);
        out.sort();
        out.into_iter().map(|c| c.into_iter().map(|i| self.names[i].clone()).collect()).collect()
    }

    /// DOT rendering with stable node order.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for n in &self.names {
            s.push_str(&format!("  {};\n", super::quote(n)));
        }
        for (a, b) in self.edges() {
            s.push_str(&format!("  {} -- {};\n", super::quote(a), super::quote(b)));
        }
        s.push_str("}\n");
        s
    }
}

/// Keep only the cliques not contained in another; the first of any duplicates survives.
pub fn max_cliques(chordal: &UndirectedGraph, elim_cliques: &[Vec<String>]) -> Result<Vec<Vec<String>>> {
    let sets: Vec<BTreeSet<usize>> = elim_cliques
        .iter()
        .map(|c| c.iter().map(|n| chordal.index(n)).collect::<Result<BTreeSet<usize>>>())
        .collect::<Result<_>>()?;
    for (c, s) in elim_cliques.iter().zip(&sets) {
        let v: Vec<usize> = s.iter().copied().collect();
        if !chordal.is_clique_idx(&v) {
            return Err(Error::InvalidModel(format!("elimination set {{{}}} is not a clique", c.join(", "))));
        }
    }
    let mut out = Vec::new();
    for (k, s) in sets.iter().enumerate() {
        let dominated = sets.iter().enumerate().any(|(m, t)| m != k && s.is_subset(t) && (s != t || m < k));
        if !dominated {
            out.push(s.iter().map(|&i| chordal.name(i).to_string()).collect());
        }
    }
    Ok(out)
}
