//! Brute-force inference by visiting every joint assignment.

use super::FactorModel;
use crate::error::{Error, Result};
use crate::factor::{Evidence, Odometer};
use crate::Factor;

/// Default limit on the number of joint assignments visited.
pub const DEFAULT_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    Marginal,
    Partition,
    Map,
}

#[derive(Debug, Clone)]
pub enum Enumeration {
    Marginal(Factor),
    Partition(f64),
    /// Assignment in model variable order and its unnormalized log-score.
    Map(Vec<usize>, f64),
}

fn joint_size<M: FactorModel + ?Sized>(model: &M, cap: usize) -> Result<usize> {
    let mut size: usize = 1;
    for v in model.variables() {
        size = size.checked_mul(v.cardinality()).filter(|&s| s <= cap).ok_or(Error::TooLarge {
            size: usize::MAX.min(size.saturating_mul(v.cardinality())),
            cap,
        })?;
    }
    Ok(size)
}

/// Visit every assignment consistent with the evidence, in lexicographic order
/// over the model's variable order, with its unnormalized probability.
fn for_each<M: FactorModel + ?Sized>(
    model: &M,
    evidence: &Evidence,
    cap: usize,
    mut visit: impl FnMut(&[usize], f64),
) -> Result<()> {
    super::check_evidence(model, evidence)?;
    joint_size(model, cap)?;
    let vars = model.variables();
    let scopes = model.scope_indices();
    let factors = model.factors();
    let fixed: Vec<Option<usize>> = vars.iter().map(|v| evidence.get(v.name()).copied()).collect();
    let mut odo = Odometer::new(vars.iter().map(|v| v.cardinality()).collect());
    while let Some(x) = odo.current() {
        if fixed.iter().zip(x).all(|(f, &s)| f.map_or(true, |f| f == s)) {
            let mut p = 1.0;
            for (f, sc) in factors.iter().zip(&scopes) {
                let mut idx = 0;
                for (v, &i) in f.scope().iter().zip(sc) {
                    idx = idx * v.cardinality() + x[i];
                }
                p *= f.values()[idx];
            }
            visit(x, p);
        }
        odo.advance();
    }
    Ok(())
}

/// Unnormalized joint table over all variables, in model variable order.
pub fn enumerate_joint<M: FactorModel + ?Sized>(model: &M, cap: usize) -> Result<Factor> {
    let mut values = Vec::new();
    for_each(model, &Evidence::new(), cap, |_, p| values.push(p))?;
    Factor::new(model.variables().to_vec(), values)
}

/// Sum of the unnormalized joint over assignments consistent with the evidence.
pub fn enumerate_partition<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<f64> {
    let mut z = 0.0;
    for_each(model, evidence, DEFAULT_CAP, |_, p| z += p)?;
    Ok(z)
}

/// Normalized marginal over `query` (in the given order) conditioned on the evidence.
pub fn enumerate_marginal<M: FactorModel + ?Sized>(model: &M, query: &[&str], evidence: &Evidence) -> Result<Factor> {
    let idx: Vec<usize> = query.iter().map(|q| model.variable_index(q)).collect::<Result<_>>()?;
    let scope: Vec<_> = idx.iter().map(|&i| model.variables()[i].clone()).collect();
    let mut table = vec![0.0; scope.iter().map(|v| v.cardinality()).product()];
    for_each(model, evidence, DEFAULT_CAP, |x, p| {
        let mut k = 0;
        for (v, &i) in scope.iter().zip(&idx) {
            k = k * v.cardinality() + x[i];
        }
        table[k] += p;
    })?;
    let z: f64 = table.iter().sum();
    if z <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Factor::new(scope, table.into_iter().map(|p| p / z).collect())
}

/// Lexicographically first maximizer of the unnormalized joint.
pub fn enumerate_map<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each(model, evidence, DEFAULT_CAP, |x, p| {
        if best.as_ref().map_or(true, |(_, b)| p > *b) {
            best = Some((x.to_vec(), p));
        }
    })?;
    match best {
        Some((x, p)) if p > 0.0 => Ok((x, p.ln())),
        _ => Err(Error::ZeroEvidence),
    }
}

/// Exact answer by full enumeration.
pub fn enumerate_inference<M: FactorModel + ?Sized>(
    model: &M,
    query: &[&str],
    evidence: &Evidence,
    mode: EnumerationMode,
) -> Result<Enumeration> {
    Ok(match mode {
        EnumerationMode::Marginal => Enumeration::Marginal(enumerate_marginal(model, query, evidence)?),
        EnumerationMode::Partition => Enumeration::Partition(enumerate_partition(model, evidence)?),
        EnumerationMode::Map => {
            let (x, s) = enumerate_map(model, evidence)?;
            Enumeration::Map(x, s)
        }
    })
}
