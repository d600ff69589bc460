use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{counts, Dataset};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, MecSignature, UndirectedGraph};

/// Where conditional independence answers come from.
#[derive(Debug, Clone, Copy)]
pub enum CiSource<'a> {
    /// G-test on the data.
    Data(&'a Dataset),
    /// Exact d-separation in a known DAG.
    Oracle(&'a DirectedGraph),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiResult {
    pub independent: bool,
    pub statistic: f64,
    pub p_value: f64,
    pub df: usize,
}

/// Test `x ⟂ y | z`. Data mode uses the likelihood-ratio G statistic with a
/// chi-squared reference; empty strata contribute nothing.
pub fn ci_test(source: CiSource, x: &str, y: &str, z: &[&str], alpha: f64) -> Result<CiResult> {
    if x == y {
        return Err(Error::Argument("x and y must differ".into()));
    }
    if z.contains(&x) || z.contains(&y) {
        return Err(Error::Argument("conditioning set must exclude x and y".into()));
    }
    match source {
        CiSource::Oracle(g) => {
            let sep = g.d_separated(&[x], &[y], z)?;
            Ok(CiResult { independent: sep, statistic: 0.0, p_value: if sep { 1.0 } else { 0.0 }, df: 0 })
        }
        CiSource::Data(d) => {
            let mut scope = z.to_vec();
            scope.push(x);
            scope.push(y);
            let t = counts(d, &scope)?;
            let cards = t.cardinalities();
            let (cx, cy) = (cards[cards.len() - 2], cards[cards.len() - 1]);
            let cz: usize = cards[..cards.len() - 2].iter().product();
            let df = (cx - 1) * (cy - 1) * cz;
            let mut g = 0.0;
            for stratum in t.counts.chunks(cx * cy) {
                let nz: u64 = stratum.iter().sum();
                if nz == 0 {
                    continue;
                }
                let nx: Vec<u64> = (0..cx).map(|a| stratum[a * cy..(a + 1) * cy].iter().sum()).collect();
                let ny: Vec<u64> = (0..cy).map(|b| (0..cx).map(|a| stratum[a * cy + b]).sum()).collect();
                for a in 0..cx {
                    for b in 0..cy {
                        let n = stratum[a * cy + b];
                        if n > 0 {
                            g += n as f64 * ((n as f64 * nz as f64) / (nx[a] as f64 * ny[b] as f64)).ln();
                        }
                    }
                }
            }
            let statistic = (2.0 * g).max(0.0);
            if df == 0 {
                log::warn!("CI test {x} vs {y} has zero degrees of freedom; reporting independence");
                return Ok(CiResult { independent: true, statistic, p_value: 1.0, df });
            }
            let chi = ChiSquared::new(df as f64).map_err(|e| Error::Argument(e.to_string()))?;
            let p_value = chi.sf(statistic);
            Ok(CiResult { independent: p_value >= alpha, statistic, p_value, df })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcOptions {
    pub alpha: f64,
    /// Largest conditioning set tried.
    pub max_cond: usize,
}

impl Default for PcOptions {
    fn default() -> Self {
        PcOptions { alpha: 0.05, max_cond: usize::MAX }
    }
}

/// Partially directed graph: a skeleton with some edges oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpdag {
    pub nodes: Vec<String>,
    pub directed: BTreeSet<(String, String)>,
    /// Unoriented edges as `(a, b)` with `a < b`.
    pub undirected: BTreeSet<(String, String)>,
    pub sepsets: BTreeMap<(String, String), Vec<String>>,
    /// Edges whose proposed orientations disagreed; left unoriented.
    pub conflicts: Vec<(String, String)>,
}

impl Cpdag {
    pub fn skeleton(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.nodes.iter());
        for (a, b) in self.directed.iter().chain(&self.undirected) {
            g.add_edge(a, b).expect("known nodes");
        }
        g
    }

    /// Skeleton plus the oriented colliders with non-adjacent parents.
    pub fn mec_signature(&self) -> MecSignature {
        let skeleton = self.skeleton();
        let mut v_structures = BTreeSet::new();
        for (a, c) in &self.directed {
            for (b, c2) in &self.directed {
                if c == c2 && a < b && !skeleton.has_edge(a, b) {
                    v_structures.insert((a.clone(), c.clone(), b.clone()));
                }
            }
        }
        MecSignature { skeleton, v_structures }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for n in &self.nodes {
            s.push_str(&format!("  {};\n", crate::graph::quote(n)));
        }
        for (a, b) in &self.directed {
            s.push_str(&format!("  {} -> {};\n", crate::graph::quote(a), crate::graph::quote(b)));
        }
        for (a, b) in &self.undirected {
            s.push_str(&format!("  {} -> {} [dir=none];\n", crate::graph::quote(a), crate::graph::quote(b)));
        }
        s.push_str("}\n");
        s
    }
}

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if items.len() < size {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[k + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct Pdag {
    adj: Vec<Vec<bool>>,
    /// `dir[i][j]`: edge oriented `i -> j`.
    dir: Vec<Vec<bool>>,
}

impl Pdag {
    fn undirected(&self, a: usize, b: usize) -> bool {
        self.adj[a][b] && !self.dir[a][b] && !self.dir[b][a]
    }

    fn arrow(&self, a: usize, b: usize) -> bool {
        self.dir[a][b]
    }

    fn orient(&mut self, a: usize, b: usize) {
        self.dir[a][b] = true;
    }

    /// One application of the first applicable orientation rule.
    fn meek_step(&mut self) -> bool {
        let n = self.adj.len();
        for a in 0..n {
            for b in 0..n {
                if !self.undirected(a, b) {
                    continue;
                }
                for c in 0..n {
                    // R1: c -> a - b, c and b non-adjacent.
                    if self.arrow(c, a) && !self.adj[c][b] && c != b {
                        self.orient(a, b);
                        return true;
                    }
                    // R2: a -> c -> b with a - b.
                    if self.arrow(a, c) && self.arrow(c, b) {
                        self.orient(a, b);
                        return true;
                    }
                }
                // R3: a - c -> b, a - d -> b, c and d non-adjacent.
                for c in 0..n {
                    if !(self.undirected(a, c) && self.arrow(c, b)) {
                        continue;
                    }
                    for d in c + 1..n {
                        if self.undirected(a, d) && self.arrow(d, b) && !self.adj[c][d] {
                            self.orient(a, b);
                            return true;
                        }
                    }
                }
                // R4: a - c -> d -> b, c and b non-adjacent, a adjacent to d.
                for c in 0..n {
                    if !self.undirected(a, c) || self.adj[c][b] || c == b {
                        continue;
                    }
                    for d in 0..n {
                        if self.arrow(c, d) && self.arrow(d, b) && self.adj[a][d] {
                            self.orient(a, b);
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Stable PC: skeleton by CI tests with growing conditioning sets, collider
/// orientation, then orientation propagation to closure.
pub fn pc(source: CiSource, variables: &[&str], opts: &PcOptions) -> Result<Cpdag> {
    let mut names: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
    names.sort();
    names.dedup();
    let n = names.len();
    let mut adj = vec![vec![true; n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        row[i] = false;
    }
    let mut sepsets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut level = 0;
    while level <= opts.max_cond {
        let frozen: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| adj[i][j]).collect()).collect();
        let mut tested_any = false;
        for i in 0..n {
            for &j in &frozen[i] {
                if !adj[i][j] {
                    continue;
                }
                let others: Vec<usize> = frozen[i].iter().copied().filter(|&k| k != j).collect();
                if others.len() < level {
                    continue;
                }
                tested_any = true;
                for s in subsets(&others, level) {
                    let z: Vec<&str> = s.iter().map(|&k| names[k].as_str()).collect();
                    if ci_test(source, &names[i], &names[j], &z, opts.alpha)?.independent {
                        adj[i][j] = false;
                        adj[j][i] = false;
                        sepsets.insert((i.min(j), i.max(j)), s);
                        break;
                    }
                }
            }
        }
        if !tested_any {
            break;
        }
        level += 1;
    }

    let mut g = Pdag { adj, dir: vec![vec![false; n]; n] };
    let mut proposals: BTreeSet<(usize, usize)> = BTreeSet::new();
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if g.adj[a][c] && g.adj[b][c] && !g.adj[a][b] {
                    let sep = sepsets.get(&(a, b)).map(|s| s.contains(&c)).unwrap_or(false);
                    if !sep {
                        proposals.insert((a, c));
                        proposals.insert((b, c));
                    }
                }
            }
        }
    }
    let mut conflicts = Vec::new();
    for &(a, b) in &proposals {
        if proposals.contains(&(b, a)) {
            if a < b {
                conflicts.push((names[a].clone(), names[b].clone()));
            }
        } else {
            g.orient(a, b);
        }
    }
    while g.meek_step() {}

    let mut cpdag = Cpdag {
        nodes: names.clone(),
        directed: BTreeSet::new(),
        undirected: BTreeSet::new(),
        sepsets: sepsets
            .into_iter()
            .map(|((a, b), s)| ((names[a].clone(), names[b].clone()), s.into_iter().map(|k| names[k].clone()).collect()))
            .collect(),
        conflicts,
    };
    for a in 0..n {
        for b in 0..n {
            if g.arrow(a, b) {
                cpdag.directed.insert((names[a].clone(), names[b].clone()));
            } else if a < b && g.undirected(a, b) {
                cpdag.undirected.insert((names[a].clone(), names[b].clone()));
            }
        }
    }
    Ok(cpdag)
}
