use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::factor::{Evidence, Semiring, Var};
use crate::models::{check_evidence, log_joint, FactorModel, FgNode};
use crate::Factor;

/// Messages keyed by directed `(source, target)` pairs.
#[derive(Debug, Clone, Default)]
pub struct MessageStore<K: Ord> {
    messages: BTreeMap<(K, K), Factor>,
    passes: usize,
}

impl<K: Ord + Copy> MessageStore<K> {
    pub fn new() -> Self {
        MessageStore { messages: BTreeMap::new(), passes: 0 }
    }

    pub fn get(&self, from: K, to: K) -> Option<&Factor> {
        self.messages.get(&(from, to))
    }

    pub(crate) fn put(&mut self, from: K, to: K, msg: Factor) {
        self.passes += 1;
        self.messages.insert((from, to), msg);
    }

    /// Number of distinct directed messages stored.
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Number of sends performed.
    pub fn passes(&self) -> usize {
        self.passes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(K, K), &Factor)> {
        self.messages.iter()
    }
}

/// Two-pass message passing on a tree-structured factor graph.
#[derive(Debug, Clone)]
pub struct TreeBp {
    variables: Vec<Var>,
    evidence: Evidence,
    semiring: Semiring,
    factors: Vec<Factor>,
    factor_vars: Vec<Vec<usize>>,
    var_factors: Vec<Vec<usize>>,
    store: MessageStore<FgNode>,
    marginals: Vec<Factor>,
    log_partition: f64,
    /// Traversal order with parent links, per component.
    schedule: Vec<(FgNode, Option<FgNode>)>,
    backpointers: BTreeMap<usize, Vec<Vec<usize>>>,
}

/// Sum-product belief propagation; fails with `NotATree` on loopy factor graphs.
pub fn tree_bp<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<TreeBp> {
    TreeBp::run(model, evidence, Semiring::SumProduct)
}

/// Max-product belief propagation with back-pointers for decoding.
pub fn tree_max_product<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<TreeBp> {
    TreeBp::run(model, evidence, Semiring::MaxProduct)
}

fn aggregate(f: &Factor, semiring: Semiring) -> f64 {
    match semiring {
        Semiring::MaxProduct => f.values().iter().copied().fold(0.0, f64::max),
        _ => f.total(),
    }
}

impl TreeBp {
    fn run<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence, semiring: Semiring) -> Result<TreeBp> {
        check_evidence(model, evidence)?;
        let variables = model.variables().to_vec();
        let factors: Vec<Factor> = model.factors().iter().map(|f| f.reduce(evidence)).collect::<Result<_>>()?;
        let factor_vars: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| f.names().iter().map(|n| model.variable_index(n)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let mut var_factors = vec![Vec::new(); variables.len()];
        for (f, vs) in factor_vars.iter().enumerate() {
            for &v in vs {
                var_factors[v].push(f);
            }
        }
        let mut bp = TreeBp {
            variables,
            evidence: evidence.clone(),
            semiring,
            factors,
            factor_vars,
            var_factors,
            store: MessageStore::new(),
            marginals: Vec::new(),
            log_partition: 0.0,
            schedule: Vec::new(),
            backpointers: BTreeMap::new(),
        };
        bp.check_forest()?;
        bp.propagate()?;
        Ok(bp)
    }

    fn check_forest(&self) -> Result<()> {
        let nv = self.variables.len();
        let mut parent: Vec<usize> = (0..nv + self.factors.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (f, vs) in self.factor_vars.iter().enumerate() {
            for &v in vs {
                let (a, b) = (find(&mut parent, nv + f), find(&mut parent, v));
                if a == b {
                    return Err(Error::NotATree);
                }
                parent[a] = b;
            }
        }
        Ok(())
    }

    fn neighbors(&self, n: FgNode) -> Vec<FgNode> {
        match n {
            FgNode::Variable(v) => self.var_factors[v].iter().map(|&f| FgNode::Factor(f)).collect(),
            FgNode::Factor(f) => self.factor_vars[f].iter().map(|&v| FgNode::Variable(v)).collect(),
        }
    }

    fn hidden(&self) -> Vec<usize> {
        // name order for deterministic roots
        let mut h: Vec<usize> =
            (0..self.variables.len()).filter(|&v| !self.evidence.contains_key(self.variables[v].name())).collect();
        h.sort_by(|&a, &b| self.variables[a].name().cmp(self.variables[b].name()));
        h
    }

    fn var_to_factor(&self, v: usize, f: Option<usize>) -> Result<Factor> {
        let mut m = Factor::ones(vec![self.variables[v].clone()])?;
        for &g in &self.var_factors[v] {
            if Some(g) != f {
                m = m.product(self.store.get(FgNode::Factor(g), FgNode::Variable(v)).expect("scheduled"))?;
            }
        }
        Ok(m)
    }

    fn factor_table(&self, f: usize, except: Option<usize>) -> Result<Factor> {
        let mut prod = self.factors[f].clone();
        for &u in &self.factor_vars[f] {
            if Some(u) != except {
                prod = prod.product(self.store.get(FgNode::Variable(u), FgNode::Factor(f)).expect("scheduled"))?;
            }
        }
        Ok(prod)
    }

    fn compute(&mut self, from: FgNode, to: FgNode, upward: bool) -> Result<f64> {
        let msg = match (from, to) {
            (FgNode::Variable(v), FgNode::Factor(f)) => self.var_to_factor(v, Some(f))?,
            (FgNode::Factor(f), FgNode::Variable(v)) => {
                let prod = self.factor_table(f, Some(v))?;
                if upward && self.semiring == Semiring::MaxProduct {
                    self.record_backpointers(f, v, &prod);
                }
                let name = self.variables[v].name().to_string();
                prod.marginal(&[name.as_str()], self.semiring)?
            }
            _ => unreachable!("factor graphs are bipartite"),
        };
        let scale = aggregate(&msg, self.semiring);
        if !(scale > 0.0) {
            return Err(Error::ZeroEvidence);
        }
        self.store.put(from, to, msg.map(|x| x / scale));
        Ok(scale.ln())
    }

    fn record_backpointers(&mut self, f: usize, v: usize, table: &Factor) {
        let pos = table.position(self.variables[v].name()).expect("v in scope");
        let card = self.variables[v].cardinality();
        let mut best: Vec<Option<(usize, f64)>> = vec![None; card];
        for (i, &x) in table.values().iter().enumerate() {
            let st = table.states_of(i);
            let s = st[pos];
            if best[s].map_or(true, |(_, b)| x > b) {
                best[s] = Some((i, x));
            }
        }
        let bp = best.into_iter().map(|b| table.states_of(b.map_or(0, |(i, _)| i))).collect();
        self.backpointers.insert(f, bp);
    }

    fn propagate(&mut self) -> Result<()> {
        let nv = self.variables.len();
        let mut seen_var = vec![false; nv];
        let mut seen_factor = vec![false; self.factors.len()];
        let mut log_z = 0.0;
        for root in self.hidden() {
            if seen_var[root] {
                continue;
            }
            seen_var[root] = true;
            let mut order: Vec<(FgNode, Option<FgNode>)> = vec![(FgNode::Variable(root), None)];
            let mut queue = VecDeque::from([FgNode::Variable(root)]);
            while let Some(n) = queue.pop_front() {
                for m in self.neighbors(n) {
                    let fresh = match m {
                        FgNode::Variable(v) => !std::mem::replace(&mut seen_var[v], true),
                        FgNode::Factor(f) => !std::mem::replace(&mut seen_factor[f], true),
                    };
                    if fresh {
                        order.push((m, Some(n)));
                        queue.push_back(m);
                    }
                }
            }
            for &(n, parent) in order.iter().rev() {
                if let Some(p) = parent {
                    log_z += self.compute(n, p, true)?;
                }
            }
            let root_belief = self.var_to_factor(root, None)?;
            let z = aggregate(&root_belief, self.semiring);
            if !(z > 0.0) {
                return Err(Error::ZeroEvidence);
            }
            log_z += z.ln();
            for &(n, parent) in &order {
                let children: Vec<FgNode> = self.neighbors(n).into_iter().filter(|&m| Some(m) != parent).collect();
                for c in children {
                    self.compute(n, c, false)?;
                }
            }
            self.schedule.extend(order);
        }
        // factors whose whole scope was observed contribute a constant
        for (f, vs) in self.factor_vars.iter().enumerate() {
            if vs.is_empty() {
                let c = self.factors[f].values()[0];
                if !(c > 0.0) {
                    return Err(Error::ZeroEvidence);
                }
                log_z += c.ln();
            }
        }
        self.log_partition = log_z;
        let mut marginals = Vec::with_capacity(nv);
        for v in 0..nv {
            let var = &self.variables[v];
            let m = match self.evidence.get(var.name()) {
                Some(&s) => Factor::from_fn(vec![var.clone()], crate::Domain::Linear, |x| if x[0] == s { 1.0 } else { 0.0 })?,
                None => {
                    let b = self.var_to_factor(v, None)?;
                    let z = aggregate(&b, self.semiring);
                    b.map(|x| x / z)
                }
            };
            marginals.push(m);
        }
        self.marginals = marginals;
        Ok(())
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn messages(&self) -> &MessageStore<FgNode> {
        &self.store
    }

    /// Number of factor-graph edges among unobserved variables.
    pub fn edge_count(&self) -> usize {
        self.factor_vars.iter().map(Vec::len).sum()
    }

    /// Single-variable marginals (max-marginals for max-product) in model variable order.
    pub fn marginals(&self) -> &[Factor] {
        &self.marginals
    }

    pub fn marginal(&self, name: &str) -> Result<&Factor> {
        let i = self.variables.iter().position(|v| v.name() == name).ok_or_else(|| Error::Lookup(name.to_string()))?;
        Ok(&self.marginals[i])
    }

    /// Normalized belief over the (evidence-reduced) scope of factor `f`.
    pub fn factor_belief(&self, f: usize) -> Result<Factor> {
        let t = self.factor_table(f, None)?;
        let z = aggregate(&t, self.semiring);
        if !(z > 0.0) {
            return Err(Error::ZeroEvidence);
        }
        Ok(t.map(|x| x / z))
    }

    /// Log partition function (sum-product) or log of the maximal score (max-product).
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Follow back-pointers from each component root; needs a max-product run.
    pub fn decode(&self) -> Result<Vec<usize>> {
        if self.semiring != Semiring::MaxProduct {
            return Err(Error::State("decoding needs a max-product run".into()));
        }
        let mut x: Vec<Option<usize>> =
            self.variables.iter().map(|v| self.evidence.get(v.name()).copied()).collect();
        for &(n, parent) in &self.schedule {
            match (n, parent) {
                (FgNode::Variable(v), None) => {
                    x[v] = Some(self.marginals[v].argmax());
                }
                (FgNode::Factor(f), Some(FgNode::Variable(p))) => {
                    let s = x[p].expect("parent decoded first");
                    let states = &self.backpointers[&f][s];
                    for (&u, &su) in self.factor_vars[f].iter().zip(states) {
                        if x[u].is_none() {
                            x[u] = Some(su);
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(x.into_iter().map(|s| s.unwrap_or(0)).collect())
    }
}

/// Most probable assignment of a tree-structured model and its log score.
///
/// Ties resolve to the lexicographically first maximizer.
pub fn tree_map<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<(Vec<usize>, f64)> {
    let x = super::first_maximizer(model, evidence, |ev| {
        let bp = tree_max_product(model, ev)?;
        Ok((bp.marginals().iter().map(|f| f.values().to_vec()).collect(), bp.decode()?))
    })?;
    let score = log_joint(model, &x)?;
    Ok((x, score))
}
