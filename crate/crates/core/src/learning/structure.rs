use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{counts, family_score, mle_bn, Dataset, ScoreKind};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, UndirectedGraph};
use crate::models::BayesianNetwork;
use crate::sampling::RandomSource;

/// Empirical mutual information (nats) between two columns.
pub fn mutual_information(d: &Dataset, x: &str, y: &str) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::InsufficientData("mutual information of an empty dataset".into()));
    }
    let t = counts(d, &[x, y])?;
    let (kx, ky) = (t.scope[0].cardinality(), t.scope[1].cardinality());
    let n = d.len() as f64;
    let px: Vec<f64> = (0..kx).map(|a| (0..ky).map(|b| t.get(&[a, b])).sum::<u64>() as f64 / n).collect();
    let py: Vec<f64> = (0..ky).map(|b| (0..kx).map(|a| t.get(&[a, b])).sum::<u64>() as f64 / n).collect();
    for (name, p) in [(x, &px), (y, &py)] {
        if p.iter().any(|&v| v == 1.0) {
            log::warn!("`{name}` is constant in the data; its mutual information is 0");
        }
    }
    let mut mi = 0.0;
    for a in 0..kx {
        for b in 0..ky {
            let c = t.get(&[a, b]);
            if c > 0 {
                let pab = c as f64 / n;
                mi += pab * (pab / (px[a] * py[b])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Maximum-weight spanning tree over `names`, oriented away from `root`.
pub fn chow_liu_tree(names: &[&str], weight: impl Fn(&str, &str) -> f64, root: &str) -> Result<DirectedGraph> {
    if names.len() < 2 {
        return Err(Error::Argument("at least two variables are needed".into()));
    }
    let mut complete = UndirectedGraph::new(names.iter());
    for i in 0..complete.len() {
        for j in i + 1..complete.len() {
            complete.add_edge_idx(i, j)?;
        }
    }
    let tree = complete.max_weight_spanning_tree(weight).tree;
    let r = tree.index(root)?;
    let mut dag = DirectedGraph::new(names.iter());
    let mut seen = vec![false; tree.len()];
    seen[r] = true;
    let mut queue = VecDeque::from([r]);
    while let Some(u) = queue.pop_front() {
        for &v in tree.neighbors_idx(u) {
            if !seen[v] {
                seen[v] = true;
                dag.add_edge(tree.name(u), tree.name(v))?;
                queue.push_back(v);
            }
        }
    }
    Ok(dag)
}

/// Chow-Liu tree with fitted tables.
#[derive(Debug, Clone)]
pub struct ChowLiu {
    pub structure: DirectedGraph,
    pub network: BayesianNetwork,
    /// Mutual information of every pair, `a < b`.
    pub weights: Vec<(String, String, f64)>,
    pub total_mi: f64,
}

pub fn chow_liu(d: &Dataset, root: &str) -> Result<ChowLiu> {
    let names = d.names();
    if names.len() < 2 {
        return Err(Error::Argument("at least two variables are needed".into()));
    }
    let mut mi: HashMap<(String, String), f64> = HashMap::new();
    let mut weights = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let w = mutual_information(d, a, b)?;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            mi.insert((lo.to_string(), hi.to_string()), w);
            weights.push((lo.to_string(), hi.to_string(), w));
        }
    }
    weights.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
    let lookup = |a: &str, b: &str| {
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        mi[&key]
    };
    let structure = chow_liu_tree(&names, lookup, root)?;
    let total_mi = structure.edges().iter().map(|(a, b)| lookup(a, b)).sum();
    let network = mle_bn(&structure, d, 0.0)?;
    Ok(ChowLiu { structure, network, weights, total_mi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillClimbOptions {
    pub kind: ScoreKind,
    /// Searches run; the first starts from the empty graph, later ones from random perturbations of it.
    pub restarts: usize,
    pub max_indegree: usize,
    pub max_steps: usize,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        HillClimbOptions { kind: ScoreKind::Bic, restarts: 1, max_indegree: 3, max_steps: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct HillClimbResult {
    pub graph: DirectedGraph,
    pub score: f64,
    pub restart: usize,
    pub steps: usize,
}

struct FamilyCache<'a> {
    d: &'a Dataset,
    kind: ScoreKind,
    names: Vec<String>,
    memo: HashMap<(usize, BTreeSet<usize>), f64>,
}

impl FamilyCache<'_> {
    fn get(&mut self, child: usize, parents: &BTreeSet<usize>) -> Result<f64> {
        if let Some(&s) = self.memo.get(&(child, parents.clone())) {
            return Ok(s);
        }
        let ps: Vec<&str> = parents.iter().map(|&p| self.names[p].as_str()).collect();
        let s = family_score(self.d, &self.names[child], &ps, self.kind)?;
        self.memo.insert((child, parents.clone()), s);
        Ok(s)
    }
}

fn reaches(g: &DirectedGraph, from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = vec![false; g.len()];
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        if !std::mem::replace(&mut seen[u], true) {
            stack.extend(g.children_idx(u).iter().copied());
        }
    }
    false
}

#[derive(Clone, Copy)]
enum Move {
    Add(usize, usize),
    Delete(usize, usize),
    Reverse(usize, usize),
}

fn with_edge(ps: &BTreeSet<usize>, add: Option<usize>, remove: Option<usize>) -> BTreeSet<usize> {
    let mut out = ps.clone();
    if let Some(a) = add {
        out.insert(a);
    }
    if let Some(r) = remove {
        out.remove(&r);
    }
    out
}

fn climb(g: &mut DirectedGraph, cache: &mut FamilyCache, opts: &HillClimbOptions) -> Result<usize> {
    let n = g.len();
    let mut steps = 0;
    while steps < opts.max_steps {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |delta: f64, m: Move| {
            if delta > 1e-9 && best.map_or(true, |(b, _)| delta > b) {
                best = Some((delta, m));
            }
        };
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pj = g.parents_idx(j).clone();
                if g.has_edge_idx(i, j) {
                    let base_j = cache.get(j, &pj)?;
                    consider(cache.get(j, &with_edge(&pj, None, Some(i)))? - base_j, Move::Delete(i, j));
                    let pi = g.parents_idx(i).clone();
                    if pi.len() < opts.max_indegree {
                        g.remove_edge_idx(i, j);
                        let ok = !reaches(g, i, j);
                        g.add_edge_idx(i, j)?;
                        if ok {
                            let delta = cache.get(j, &with_edge(&pj, None, Some(i)))? - base_j
                                + cache.get(i, &with_edge(&pi, Some(j), None))?
                                - cache.get(i, &pi)?;
                            consider(delta, Move::Reverse(i, j));
                        }
                    }
                } else if !g.has_edge_idx(j, i) && pj.len() < opts.max_indegree && !reaches(g, j, i) {
                    let delta = cache.get(j, &with_edge(&pj, Some(i), None))? - cache.get(j, &pj)?;
                    consider(delta, Move::Add(i, j));
                }
            }
        }
        let Some((_, m)) = best else { break };
        match m {
            Move::Add(i, j) => g.add_edge_idx(i, j)?,
            Move::Delete(i, j) => {
                g.remove_edge_idx(i, j);
            }
            Move::Reverse(i, j) => {
                g.remove_edge_idx(i, j);
                g.add_edge_idx(j, i)?;
            }
        }
        steps += 1;
    }
    Ok(steps)
}

/// Greedy DAG search over single-edge additions, deletions and reversals.
pub fn hill_climb(d: &Dataset, opts: &HillClimbOptions, rng: &mut RandomSource) -> Result<HillClimbResult> {
    if d.is_empty() {
        return Err(Error::InsufficientData("cannot learn structure from an empty dataset".into()));
    }
    let names: Vec<String> = d.names().iter().map(|s| s.to_string()).collect();
    let mut cache = FamilyCache { d, kind: opts.kind, names: names.clone(), memo: HashMap::new() };
    let n = names.len();
    let mut best: Option<HillClimbResult> = None;
    for restart in 0..opts.restarts.max(1) {
        let mut g = DirectedGraph::new(names.iter());
        if restart > 0 && n > 1 {
            for _ in 0..n {
                let (i, j) = (rng.index(n), rng.index(n));
                if i != j
                    && !g.has_edge_idx(i, j)
                    && !g.has_edge_idx(j, i)
                    && g.parents_idx(j).len() < opts.max_indegree
                    && !reaches(&g, j, i)
                {
                    g.add_edge_idx(i, j)?;
                }
            }
        }
        let steps = climb(&mut g, &mut cache, opts)?;
        let mut s = 0.0;
        for j in 0..n {
            s += cache.get(j, &g.parents_idx(j).clone())?;
        }
        if best.as_ref().map_or(true, |b| s > b.score + 1e-9) {
            best = Some(HillClimbResult { graph: g, score: s, restart, steps });
        }
    }
    Ok(best.expect("at least one restart"))
}
