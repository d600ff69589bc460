//! Parameter and structure learning from complete discrete data.
//!
//! Structure search runs in DAG space with add/delete/reverse moves rather
//! than over equivalence classes.

mod crf;
mod gmm;
mod mrf;
mod params;
mod pc;
mod score;
mod structure;

pub use crf::{crf_objective, fit_chain_crf, CrfFit, CrfOptions, LabeledSequence};
pub use gmm::{em_gmm, gaussian_log_density, GmmFit, GmmInit, GmmOptions, GmmParams};
pub use mrf::{
    fit_mrf, fit_mrf_pseudo_likelihood, mrf_log_likelihood, mrf_objective, pseudo_likelihood, MrfFit, MrfFitOptions,
};
pub use params::{bayesian_bn, bn_log_likelihood, mle_bn};
pub use pc::{ci_test, pc, CiResult, CiSource, Cpdag, PcOptions};
pub use score::{family_score, parameter_count, score, ScoreKind};
pub use structure::{chow_liu, chow_liu_tree, hill_climb, mutual_information, ChowLiu, HillClimbOptions, HillClimbResult};

use crate::error::{Error, Result};
use crate::factor::Var;
use crate::models::check_variables;
use crate::sampling::SampleBatch;

/// Complete discrete observations over a fixed variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    variables: Vec<Var>,
    rows: Vec<Vec<usize>>,
}

impl Dataset {
    pub fn new(variables: Vec<Var>, rows: Vec<Vec<usize>>) -> Result<Self> {
        check_variables(&variables)?;
        for (r, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(Error::Dataset {
                    row: r,
                    col: row.len().min(variables.len()),
                    message: format!("expected {} values, found {}", variables.len(), row.len()),
                });
            }
            for (c, (&s, v)) in row.iter().zip(&variables).enumerate() {
                if s >= v.cardinality() {
                    return Err(Error::Dataset {
                        row: r,
                        col: c,
                        message: format!("state {s} out of range for `{}`", v.name()),
                    });
                }
            }
        }
        Ok(Dataset { variables, rows })
    }

    pub fn from_samples(batch: &SampleBatch) -> Self {
        Dataset { variables: batch.variables.clone(), rows: batch.assignments.clone() }
    }

    pub fn variables(&self) -> &[Var] {
        &self.variables
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name()).collect()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.variables.iter().position(|v| v.name() == name).ok_or_else(|| Error::Lookup(name.to_string()))
    }

    pub fn variable(&self, name: &str) -> Result<&Var> {
        Ok(&self.variables[self.column(name)?])
    }

    pub(crate) fn columns(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.column(n)).collect()
    }
}

/// Joint counts over a scope, laid out like a factor (first variable slowest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub scope: Vec<Var>,
    pub counts: Vec<u64>,
}

impl CountTable {
    pub fn cardinalities(&self) -> Vec<usize> {
        self.scope.iter().map(|v| v.cardinality()).collect()
    }

    pub fn index_of(&self, states: &[usize]) -> usize {
        states.iter().zip(&self.scope).fold(0, |acc, (&s, v)| acc * v.cardinality() + s)
    }

    pub fn get(&self, states: &[usize]) -> u64 {
        self.counts[self.index_of(states)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_factor(&self) -> Result<crate::Factor> {
        crate::Factor::new(self.scope.clone(), self.counts.iter().map(|&c| c as f64).collect())
    }
}

/// Exact joint counts of the named columns.
pub fn counts(d: &Dataset, scope: &[&str]) -> Result<CountTable> {
    let cols = d.columns(scope)?;
    let vars: Vec<Var> = cols.iter().map(|&c| d.variables[c].clone()).collect();
    let size: usize = vars.iter().map(|v| v.cardinality()).product();
    let mut table = CountTable { scope: vars, counts: vec![0; size] };
    for row in &d.rows {
        let idx = cols.iter().fold(0, |acc, &c| acc * d.variables[c].cardinality() + row[c]);
        table.counts[idx] += 1;
    }
    Ok(table)
}

/// Dirichlet concentration vector; two entries is the Beta case.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::Argument("a Dirichlet needs at least two categories".into()));
        }
        if alpha.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Argument("concentrations must be positive and finite".into()));
        }
        Ok(DirichletParams { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn posterior_mean(&self) -> Vec<f64> {
        let s: f64 = self.alpha.iter().sum();
        self.alpha.iter().map(|a| a / s).collect()
    }
}

/// Conjugate update `α + counts`.
pub fn dirichlet_posterior(prior: &DirichletParams, counts: &[u64]) -> Result<DirichletParams> {
    if counts.len() != prior.alpha.len() {
        return Err(Error::Shape(format!("{} counts for {} categories", counts.len(), prior.alpha.len())));
    }
    DirichletParams::new(prior.alpha.iter().zip(counts).map(|(a, &c)| a + c as f64).collect())
}
