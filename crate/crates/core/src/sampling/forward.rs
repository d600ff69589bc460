use std::collections::VecDeque;

use super::{RandomSource, SampleBatch};
use crate::error::{Error, Result};
use crate::exact::JunctionTree;
use crate::factor::{Evidence, Semiring};
use crate::models::{check_evidence, BayesianNetwork, FactorModel};

/// Per-variable lookup for ancestral sampling.
struct Ancestral {
    order: Vec<usize>,
    /// `(parent variable index, stride in the table)` per variable.
    parents: Vec<Vec<(usize, usize)>>,
    child_stride: Vec<usize>,
    cards: Vec<usize>,
}

impl Ancestral {
    fn new(bn: &BayesianNetwork) -> Result<Self> {
        let order = bn.topological_indices()?;
        let mut parents = Vec::new();
        let mut child_stride = Vec::new();
        for f in bn.cpds() {
            let strides = f.strides();
            child_stride.push(strides[0]);
            parents.push(
                f.names()[1..].iter().zip(&strides[1..]).map(|(n, &s)| (bn.variable_index(n).expect("scope checked"), s)).collect(),
            );
        }
        let cards = bn.variables().iter().map(|v| v.cardinality()).collect();
        Ok(Ancestral { order, parents, child_stride, cards })
    }

    fn draw(&self, bn: &BayesianNetwork, rng: &mut RandomSource, x: &mut [usize]) -> Result<()> {
        let mut row = Vec::new();
        for &i in &self.order {
            let base: usize = self.parents[i].iter().map(|&(p, s)| x[p] * s).sum();
            let vals = bn.cpds()[i].values();
            row.clear();
            row.extend((0..self.cards[i]).map(|k| vals[base + k * self.child_stride[i]]));
            x[i] = rng.categorical(&row).ok_or_else(|| {
                Error::InvalidModel(format!("conditional table of `{}` has an all-zero row", bn.variables()[i].name()))
            })?;
        }
        Ok(())
    }
}

/// `n` independent joint samples drawn in topological order.
pub fn forward_sample(bn: &BayesianNetwork, n: usize, rng: &mut RandomSource) -> Result<SampleBatch> {
    let anc = Ancestral::new(bn)?;
    let mut batch = SampleBatch::new(bn.variables().to_vec(), rng.seed());
    let mut x = vec![0; bn.variables().len()];
    for _ in 0..n {
        anc.draw(bn, rng, &mut x)?;
        batch.assignments.push(x.clone());
    }
    Ok(batch)
}

/// Samples from a calibrated sum-product junction tree, clique by clique from
/// clique 0, each conditioned on the variables already drawn.
pub fn jt_forward_sample(jt: &JunctionTree, n: usize, rng: &mut RandomSource) -> Result<SampleBatch> {
    if jt.semiring() != Some(Semiring::SumProduct) {
        return Err(Error::State("junction tree is not calibrated with sum-product".into()));
    }
    let beliefs = jt.beliefs()?;
    let k = beliefs.len();
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in jt.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut order = Vec::new();
    let mut seen = vec![false; k];
    for root in 0..k {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(c) = q.pop_front() {
            order.push(c);
            for &d in &adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    q.push_back(d);
                }
            }
        }
    }
    let vars = jt.variables();
    let scopes: Vec<Vec<usize>> = beliefs
        .iter()
        .map(|b| b.names().iter().map(|nm| vars.iter().position(|v| v.name() == *nm).expect("clique variable")).collect())
        .collect();
    let mut batch = SampleBatch::new(vars.to_vec(), rng.seed());
    let mut weights = Vec::new();
    for _ in 0..n {
        let mut x: Vec<Option<usize>> = vec![None; vars.len()];
        for &c in &order {
            let b = &beliefs[c];
            weights.clear();
            for (idx, &v) in b.values().iter().enumerate() {
                let states = b.states_of(idx);
                let ok = scopes[c].iter().zip(&states).all(|(&i, &s)| x[i].is_none_or(|xi| xi == s));
                weights.push(if ok { v } else { 0.0 });
            }
            let idx = rng.categorical(&weights).ok_or(Error::ZeroEvidence)?;
            for (&i, s) in scopes[c].iter().zip(b.states_of(idx)) {
                x[i] = Some(s);
            }
        }
        batch.assignments.push(x.into_iter().map(|s| s.unwrap_or(0)).collect());
    }
    Ok(batch)
}

/// Rejection-sampling estimate of `p(evidence)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionEstimate {
    pub estimate: f64,
    pub accepted: usize,
    pub n: usize,
    /// Set when no sample matched the evidence.
    pub warning: Option<String>,
    /// The accepted samples, distributed as `p(x | evidence)`.
    pub samples: SampleBatch,
}

pub fn rejection_estimate(
    bn: &BayesianNetwork,
    evidence: &Evidence,
    n: usize,
    rng: &mut RandomSource,
) -> Result<RejectionEstimate> {
    check_evidence(bn, evidence)?;
    let ev: Vec<(usize, usize)> = evidence.iter().map(|(k, &s)| (bn.variable_index(k).expect("checked"), s)).collect();
    let anc = Ancestral::new(bn)?;
    let mut samples = SampleBatch::new(bn.variables().to_vec(), rng.seed());
    let mut x = vec![0; bn.variables().len()];
    for _ in 0..n {
        anc.draw(bn, rng, &mut x)?;
        if ev.iter().all(|&(i, s)| x[i] == s) {
            samples.assignments.push(x.clone());
        }
    }
    let accepted = samples.len();
    let warning = (accepted == 0).then(|| {
        let msg = format!("no sample out of {n} matched the evidence; estimate is 0");
        log::warn!("{msg}");
        msg
    });
    let estimate = if n == 0 { 0.0 } else { accepted as f64 / n as f64 };
    Ok(RejectionEstimate { estimate, accepted, n, warning, samples })
}
