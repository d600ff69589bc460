use std::collections::{BTreeSet, VecDeque};

use super::ordering::{choose_ordering, Heuristic};
use super::tree_bp::MessageStore;
use crate::error::{Error, Result};
use crate::factor::{Evidence, Semiring, Var};
use crate::graph::{max_cliques, UndirectedGraph};
use crate::models::{check_evidence, log_joint, FactorModel};
use crate::Factor;

/// Clique tree with sepsets, potentials and (after calibration) beliefs.
#[derive(Debug, Clone)]
pub struct JunctionTree {
    variables: Vec<Var>,
    /// Variable indices of each clique, in name order; cliques sorted lexicographically by names.
    cliques: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    factors: Vec<Factor>,
    /// Factors assigned to each clique.
    assignment: Vec<Vec<usize>>,
    potentials: Vec<Factor>,
    calibration: Option<Calibration>,
}

#[derive(Debug, Clone)]
struct Calibration {
    semiring: Semiring,
    evidence: Evidence,
    messages: MessageStore<usize>,
    /// Log scale of each directed message relative to the unnormalized message.
    beliefs: Vec<Factor>,
    clique_log_z: Vec<f64>,
}

/// Moralize (via factor scopes), triangulate with min-fill, keep the maximal
/// elimination cliques and join them by a maximum-weight spanning tree on
/// sepset sizes.
pub fn build_junction_tree<M: FactorModel + ?Sized>(model: &M) -> Result<JunctionTree> {
    build_junction_tree_with(model, Heuristic::MinFill)
}

pub fn build_junction_tree_with<M: FactorModel + ?Sized>(model: &M, heuristic: Heuristic) -> Result<JunctionTree> {
    let g = model.interaction_graph();
    let ordering = choose_ordering(model, heuristic, &[])?;
    let order: Vec<&str> = ordering.order.iter().map(String::as_str).collect();
    let (chordal, elim) = g.triangulate(&order)?;
    let mut named = max_cliques(&chordal, &elim)?;
    named.sort();
    let variables = model.variables().to_vec();
    let mut cliques: Vec<Vec<usize>> = named
        .iter()
        .map(|c| c.iter().map(|n| model.variable_index(n)).collect::<Result<Vec<usize>>>())
        .collect::<Result<_>>()?;
    if cliques.is_empty() {
        cliques.push(Vec::new());
    }
    let k = cliques.len();
    let labels: Vec<String> = (0..k).map(|i| format!("c{i:06}")).collect();
    let mut cg = UndirectedGraph::new(labels.iter());
    for i in 0..k {
        for j in i + 1..k {
            cg.add_edge_idx(i, j)?;
        }
    }
    let sets: Vec<BTreeSet<usize>> = cliques.iter().map(|c| c.iter().copied().collect()).collect();
    let tree = cg.max_weight_spanning_tree(|a, b| {
        let (i, j) = (cg.index(a).unwrap(), cg.index(b).unwrap());
        sets[i].intersection(&sets[j]).count() as f64
    });
    let edges = tree.tree.edges_idx();
    let mut adjacency = vec![Vec::new(); k];
    for &(i, j) in &edges {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let factors = model.factors().to_vec();
    let mut assignment = vec![Vec::new(); k];
    for (fi, f) in factors.iter().enumerate() {
        let scope: BTreeSet<usize> = f.names().iter().map(|n| model.variable_index(n)).collect::<Result<_>>()?;
        let c = (0..k).find(|&c| scope.is_subset(&sets[c])).ok_or_else(|| {
            Error::InvalidModel(format!("no clique contains factor over ({})", f.names().join(", ")))
        })?;
        assignment[c].push(fi);
    }
    let mut potentials = Vec::with_capacity(k);
    for c in 0..k {
        let scope: Vec<Var> = cliques[c].iter().map(|&v| variables[v].clone()).collect();
        let mut p = Factor::ones(scope)?;
        for &fi in &assignment[c] {
            p = p.product(&factors[fi])?;
        }
        potentials.push(p);
    }
    let jt = JunctionTree { variables, cliques, edges, adjacency, factors, assignment, potentials, calibration: None };
    if !jt.family_preservation() || !jt.running_intersection() {
        return Err(Error::InvalidModel("junction tree properties violated".into()));
    }
    Ok(jt)
}

impl JunctionTree {
    /// Same cliques and factor assignment with new tables (same scopes), uncalibrated.
    pub fn with_factors(&self, factors: Vec<Factor>) -> Result<JunctionTree> {
        if factors.len() != self.factors.len()
            || factors.iter().zip(&self.factors).any(|(a, b)| a.names() != b.names())
        {
            return Err(Error::Scope("replacement factors must keep every scope".into()));
        }
        let mut potentials = Vec::with_capacity(self.cliques.len());
        for (c, clique) in self.cliques.iter().enumerate() {
            let scope: Vec<Var> = clique.iter().map(|&v| self.variables[v].clone()).collect();
            let mut p = Factor::ones(scope)?;
            for &fi in &self.assignment[c] {
                p = p.product(&factors[fi])?;
            }
            potentials.push(p);
        }
        Ok(JunctionTree { factors, potentials, calibration: None, ..self.clone() })
    }

    pub fn cliques(&self) -> Vec<Vec<&str>> {
        self.cliques.iter().map(|c| c.iter().map(|&v| self.variables[v].name()).collect()).collect()
    }

    pub fn clique_indices(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn variables(&self) -> &[Var] {
        &self.variables
    }

    pub fn sepset(&self, i: usize, j: usize) -> Vec<usize> {
        self.cliques[i].iter().copied().filter(|v| self.cliques[j].contains(v)).collect()
    }

    /// The model's factors, indexed as in [`JunctionTree::assignment`].
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn potentials(&self) -> &[Factor] {
        &self.potentials
    }

    /// Factor indices assigned to each clique.
    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.assignment
    }

    /// Every factor's scope lies inside the clique it was assigned to.
    pub fn family_preservation(&self) -> bool {
        let mut assigned = vec![false; self.factors.len()];
        for (c, fs) in self.assignment.iter().enumerate() {
            for &fi in fs {
                assigned[fi] = true;
                let ok = self.factors[fi]
                    .names()
                    .iter()
                    .all(|n| self.cliques[c].iter().any(|&v| self.variables[v].name() == *n));
                if !ok {
                    return false;
                }
            }
        }
        assigned.into_iter().all(|a| a)
    }

    /// The cliques containing any given variable form a connected subtree,
    /// and the clique graph is a tree.
    pub fn running_intersection(&self) -> bool {
        let k = self.cliques.len();
        if self.edges.len() + 1 != k {
            return false;
        }
        for v in 0..self.variables.len() {
            let holders: Vec<usize> = (0..k).filter(|&c| self.cliques[c].contains(&v)).collect();
            let Some(&start) = holders.first() else { continue };
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                for &d in &self.adjacency[c] {
                    if self.cliques[d].contains(&v) && seen.insert(d) {
                        queue.push_back(d);
                    }
                }
            }
            if seen.len() != holders.len() {
                return false;
            }
        }
        true
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibration.is_some()
    }

    /// Shafer-Shenoy two-pass calibration with clique 0 as root.
    pub fn calibrate(&mut self, evidence: &Evidence, semiring: Semiring) -> Result<()> {
        if !matches!(semiring, Semiring::SumProduct | Semiring::MaxProduct) {
            return Err(Error::Unsupported(format!("calibration over {}", semiring.name())));
        }
        for (name, &s) in evidence {
            let v = self
                .variables
                .iter()
                .find(|v| v.name() == name)
                .ok_or_else(|| Error::Evidence(format!("unknown variable `{name}`")))?;
            if s >= v.cardinality() {
                return Err(Error::Evidence(format!("state {s} out of range for `{name}`")));
            }
        }
        self.calibration = None;
        let k = self.cliques.len();
        let psi: Vec<Factor> = self.potentials.iter().map(|p| p.observe(evidence)).collect::<Result<_>>()?;
        let agg = |f: &Factor| match semiring {
            Semiring::MaxProduct => f.values().iter().copied().fold(0.0, f64::max),
            _ => f.total(),
        };
        let mut order = vec![(0usize, None::<usize>)];
        let mut seen = vec![false; k];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let c = order[head].0;
            head += 1;
            for &d in &self.adjacency[c] {
                if !seen[d] {
                    seen[d] = true;
                    order.push((d, Some(c)));
                }
            }
        }
        let mut messages = MessageStore::new();
        let mut log_scale = std::collections::BTreeMap::new();
        let send = |from: usize, to: usize, messages: &mut MessageStore<usize>, log_scale: &mut std::collections::BTreeMap<(usize, usize), f64>| -> Result<()> {
            let mut prod = psi[from].clone();
            let mut scale = 0.0;
            for &n in &self.adjacency[from] {
                if n != to {
                    prod = prod.product(messages.get(n, from).expect("scheduled"))?;
                    scale += log_scale[&(n, from)];
                }
            }
            let sep: Vec<&str> = self.sepset(from, to).iter().map(|&v| self.variables[v].name()).collect();
            let msg = prod.marginal(&sep, semiring)?;
            let z = agg(&msg);
            if !(z > 0.0) {
                return Err(Error::ZeroEvidence);
            }
            messages.put(from, to, msg.map(|x| x / z));
            log_scale.insert((from, to), scale + z.ln());
            Ok(())
        };
        for &(c, parent) in order.iter().rev() {
            if let Some(p) = parent {
                send(c, p, &mut messages, &mut log_scale)?;
            }
        }
        for &(c, parent) in &order {
            for &d in &self.adjacency[c] {
                if Some(d) != parent {
                    send(c, d, &mut messages, &mut log_scale)?;
                }
            }
        }
        let mut beliefs = Vec::with_capacity(k);
        let mut clique_log_z = Vec::with_capacity(k);
        for c in 0..k {
            let mut b = psi[c].clone();
            let mut scale = 0.0;
            for &n in &self.adjacency[c] {
                b = b.product(messages.get(n, c).expect("calibrated"))?;
                scale += log_scale[&(n, c)];
            }
            let z = agg(&b);
            if !(z > 0.0) {
                return Err(Error::ZeroEvidence);
            }
            clique_log_z.push(z.ln() + scale);
            beliefs.push(b.map(|x| x / z));
        }
        self.calibration = Some(Calibration { semiring, evidence: evidence.clone(), messages, beliefs, clique_log_z });
        Ok(())
    }

    fn calibration(&self) -> Result<&Calibration> {
        self.calibration.as_ref().ok_or_else(|| Error::State("junction tree is not calibrated".into()))
    }

    pub fn messages(&self) -> Result<&MessageStore<usize>> {
        Ok(&self.calibration()?.messages)
    }

    pub fn semiring(&self) -> Option<Semiring> {
        self.calibration.as_ref().map(|c| c.semiring)
    }

    pub fn evidence(&self) -> Option<&Evidence> {
        self.calibration.as_ref().map(|c| &c.evidence)
    }

    /// Normalized clique beliefs.
    pub fn beliefs(&self) -> Result<&[Factor]> {
        Ok(&self.calibration()?.beliefs)
    }

    /// Log of Σβ_c computed independently at each clique.
    pub fn clique_log_partitions(&self) -> Result<&[f64]> {
        Ok(&self.calibration()?.clique_log_z)
    }

    /// log p(evidence) (log Z(evidence) for an MRF), or the log max score after max-product.
    pub fn log_partition(&self) -> Result<f64> {
        Ok(self.calibration()?.clique_log_z[0])
    }

    /// Normalized marginal of one variable from the smallest clique containing it.
    pub fn query(&self, name: &str) -> Result<Factor> {
        let cal = self.calibration()?;
        let v = self.variables.iter().position(|x| x.name() == name).ok_or_else(|| Error::Lookup(name.to_string()))?;
        let c = (0..self.cliques.len())
            .filter(|&c| self.cliques[c].contains(&v))
            .min_by_key(|&c| self.cliques[c].len())
            .ok_or_else(|| Error::Lookup(name.to_string()))?;
        let m = cal.beliefs[c].marginal(&[name], cal.semiring)?;
        let z = match cal.semiring {
            Semiring::MaxProduct => m.values().iter().copied().fold(0.0, f64::max),
            _ => m.total(),
        };
        Ok(m.map(|x| x / z))
    }

    /// Sepset marginal computed from clique `c`'s belief.
    pub fn sepset_marginal(&self, c: usize, other: usize) -> Result<Factor> {
        let cal = self.calibration()?;
        let sep: Vec<&str> = self.sepset(c, other).iter().map(|&v| self.variables[v].name()).collect();
        cal.beliefs[c].marginal(&sep, cal.semiring)
    }

    /// Decode a maximizing assignment from a max-product calibration.
    pub fn decode(&self) -> Result<Vec<usize>> {
        let cal = self.calibration()?;
        if cal.semiring != Semiring::MaxProduct {
            return Err(Error::State("decoding needs a max-product calibration".into()));
        }
        let mut x: Vec<Option<usize>> = self.variables.iter().map(|v| cal.evidence.get(v.name()).copied()).collect();
        let k = self.cliques.len();
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(c) = queue.pop_front() {
            let b = &cal.beliefs[c];
            let mut best: Option<(usize, f64)> = None;
            for (i, &val) in b.values().iter().enumerate() {
                let st = b.states_of(i);
                let consistent = self.cliques[c].iter().zip(&st).all(|(&v, &s)| x[v].map_or(true, |a| a == s));
                if consistent && best.map_or(true, |(_, bv)| val > bv) {
                    best = Some((i, val));
                }
            }
            let (i, _) = best.ok_or(Error::ZeroEvidence)?;
            for (&v, s) in self.cliques[c].iter().zip(b.states_of(i)) {
                x[v].get_or_insert(s);
            }
            for &d in &self.adjacency[c] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        Ok(x.into_iter().map(|s| s.unwrap_or(0)).collect())
    }

    /// DOT rendering: cliques as ellipses, sepsets as boxes between them.
    pub fn to_dot(&self) -> String {
        let name = |c: &[usize]| -> String {
            let n: Vec<&str> = c.iter().map(|&v| self.variables[v].name()).collect();
            n.join(",")
        };
        let mut s = String::from("graph JunctionTree {\n");
        for (i, c) in self.cliques.iter().enumerate() {
            s.push_str(&format!("  c{i} [shape=ellipse, label={}];\n", crate::graph::quote(&name(c))));
        }
        for &(i, j) in &self.edges {
            s.push_str(&format!("  s{i}_{j} [shape=box, label={}];\n", crate::graph::quote(&name(&self.sepset(i, j)))));
            s.push_str(&format!("  c{i} -- s{i}_{j};\n  s{i}_{j} -- c{j};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Calibrated copy of a junction tree.
pub fn jt_calibrate(jt: &JunctionTree, evidence: &Evidence) -> Result<JunctionTree> {
    let mut out = jt.clone();
    out.calibrate(evidence, Semiring::SumProduct)?;
    Ok(out)
}

/// Most probable assignment via a max-product calibrated junction tree.
pub fn junction_tree_map<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<(Vec<usize>, f64)> {
    check_evidence(model, evidence)?;
    let mut jt = build_junction_tree(model)?;
    let x = super::first_maximizer(model, evidence, |ev| {
        jt.calibrate(ev, Semiring::MaxProduct)?;
        let mm = model
            .variables()
            .iter()
            .map(|v| if ev.contains_key(v.name()) { Ok(Vec::new()) } else { Ok(jt.query(v.name())?.values().to_vec()) })
            .collect::<Result<_>>()?;
        Ok((mm, jt.decode()?))
    })?;
    let score = log_joint(model, &x)?;
    Ok((x, score))
}
