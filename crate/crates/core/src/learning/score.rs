use statrs::function::gamma::ln_gamma;

use super::{counts, Dataset};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Structure score. `Bd` carries the prior count per table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreKind {
    LogLik,
    Aic,
    Bic,
    Bd(f64),
}

impl ScoreKind {
    /// Bayesian Dirichlet with one prior count per cell.
    pub fn bd() -> Self {
        ScoreKind::Bd(1.0)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "loglik" => Ok(ScoreKind::LogLik),
            "aic" => Ok(ScoreKind::Aic),
            "bic" => Ok(ScoreKind::Bic),
            "bd" => Ok(ScoreKind::bd()),
            _ => Err(Error::Argument(format!("unknown score `{s}` (loglik, aic, bic, bd)"))),
        }
    }
}

/// Independent parameters of one family: `(card − 1) · ∏ parent cards`.
pub fn parameter_count(d: &Dataset, child: &str, parents: &[&str]) -> Result<usize> {
    let k = d.variable(child)?.cardinality();
    let q: usize = parents.iter().map(|p| d.variable(p).map(|v| v.cardinality())).product::<Result<usize>>()?;
    Ok((k - 1) * q)
}

/// Score contribution of one family; the total score is the sum over families.
pub fn family_score(d: &Dataset, child: &str, parents: &[&str], kind: ScoreKind) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::InsufficientData("cannot score an empty dataset".into()));
    }
    let mut scope = parents.to_vec();
    scope.push(child);
    let table = counts(d, &scope)?;
    let k = d.variable(child)?.cardinality();
    match kind {
        ScoreKind::Bd(prior) => {
            if !(prior > 0.0) {
                return Err(Error::Argument("BD prior count must be positive".into()));
            }
            let mut s = 0.0;
            for chunk in table.counts.chunks(k) {
                let n: u64 = chunk.iter().sum();
                s += ln_gamma(prior * k as f64) - ln_gamma(prior * k as f64 + n as f64);
                for &c in chunk {
                    s += ln_gamma(prior + c as f64) - ln_gamma(prior);
                }
            }
            Ok(s)
        }
        _ => {
            let mut ll = 0.0;
            for chunk in table.counts.chunks(k) {
                let n: u64 = chunk.iter().sum();
                for &c in chunk {
                    if c > 0 {
                        ll += c as f64 * (c as f64 / n as f64).ln();
                    }
                }
            }
            let p = parameter_count(d, child, parents)? as f64;
            Ok(match kind {
                ScoreKind::LogLik => ll,
                ScoreKind::Aic => ll - p,
                ScoreKind::Bic => ll - (d.len() as f64).ln() / 2.0 * p,
                ScoreKind::Bd(_) => unreachable!(),
            })
        }
    }
}

/// Decomposable score of a DAG on the dataset's variables.
pub fn score(structure: &DirectedGraph, d: &Dataset, kind: ScoreKind) -> Result<f64> {
    if !structure.is_acyclic() {
        return Err(Error::NotADag(structure.find_cycle().unwrap_or_default()));
    }
    let mut total = 0.0;
    for child in structure.nodes() {
        total += family_score(d, child, &structure.parents(child)?, kind)?;
    }
    Ok(total)
}
