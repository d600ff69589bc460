use super::{counts, dirichlet_posterior, Dataset, DirichletParams};
use crate::error::{Error, Result};
use crate::factor::Var;
use crate::graph::DirectedGraph;
use crate::models::{cpd_from_rows, log_joint, BayesianNetwork, FactorModel};

/// Conditional tables by counting, with an additive pseudocount per cell.
///
/// Parent configurations never seen get a uniform row (with a warning) when
/// the pseudocount is zero. A positive pseudocount keeps unseen child states
/// away from probability zero.
pub fn mle_bn(structure: &DirectedGraph, d: &Dataset, pseudocount: f64) -> Result<BayesianNetwork> {
    if !(pseudocount >= 0.0) || !pseudocount.is_finite() {
        return Err(Error::Argument("pseudocount must be finite and nonnegative".into()));
    }
    if !structure.is_acyclic() {
        return Err(Error::NotADag(structure.find_cycle().unwrap_or_default()));
    }
    let mut vars: Vec<Var> = Vec::with_capacity(structure.len());
    let mut cpds = Vec::with_capacity(structure.len());
    for child in structure.nodes() {
        let parents = structure.parents(child)?;
        let mut scope: Vec<&str> = parents.clone();
        scope.push(child);
        let table = counts(d, &scope)?;
        let k = d.variable(child)?.cardinality();
        let mut rows = Vec::with_capacity(table.counts.len());
        for (j, chunk) in table.counts.chunks(k).enumerate() {
            let n: u64 = chunk.iter().sum();
            let denom = n as f64 + pseudocount * k as f64;
            if denom == 0.0 {
                log::warn!("`{child}`: parent configuration {j} never observed; using a uniform row");
                rows.extend(std::iter::repeat(1.0 / k as f64).take(k));
            } else {
                rows.extend(chunk.iter().map(|&c| (c as f64 + pseudocount) / denom));
            }
        }
        let parent_vars: Vec<Var> = parents.iter().map(|p| d.variable(p).cloned()).collect::<Result<_>>()?;
        let child_var = d.variable(child)?.clone();
        vars.push(child_var.clone());
        cpds.push(cpd_from_rows(child_var, parent_vars, rows)?);
    }
    BayesianNetwork::new(vars, cpds)
}

/// Total log-likelihood of the rows under a network.
pub fn bn_log_likelihood(bn: &BayesianNetwork, d: &Dataset) -> Result<f64> {
    let cols: Vec<usize> = bn.variables().iter().map(|v| d.column(v.name())).collect::<Result<_>>()?;
    let mut total = 0.0;
    let mut x = vec![0; cols.len()];
    for row in d.rows() {
        for (slot, &c) in x.iter_mut().zip(&cols) {
            *slot = row[c];
        }
        total += log_joint(bn, &x)?;
    }
    Ok(total)
}

/// Posterior-mean tables under a symmetric Dirichlet(`alpha`) prior on every
/// row, computed through the conjugate update.
pub fn bayesian_bn(structure: &DirectedGraph, d: &Dataset, alpha: f64) -> Result<BayesianNetwork> {
    if !structure.is_acyclic() {
        return Err(Error::NotADag(structure.find_cycle().unwrap_or_default()));
    }
    let mut vars: Vec<Var> = Vec::with_capacity(structure.len());
    let mut cpds = Vec::with_capacity(structure.len());
    for child in structure.nodes() {
        let parents = structure.parents(child)?;
        let mut scope: Vec<&str> = parents.clone();
        scope.push(child);
        let table = counts(d, &scope)?;
        let child_var = d.variable(child)?.clone();
        let prior = DirichletParams::new(vec![alpha; child_var.cardinality()])?;
        let mut rows = Vec::with_capacity(table.counts.len());
        for chunk in table.counts.chunks(child_var.cardinality()) {
            rows.extend(dirichlet_posterior(&prior, chunk)?.posterior_mean());
        }
        let parent_vars: Vec<Var> = parents.iter().map(|p| d.variable(p).cloned()).collect::<Result<_>>()?;
        vars.push(child_var.clone());
        cpds.push(cpd_from_rows(child_var, parent_vars, rows)?);
    }
    BayesianNetwork::new(vars, cpds)
}
