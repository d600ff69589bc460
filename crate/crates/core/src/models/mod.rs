//! Model containers, validation, conversions and the enumeration oracle.

mod bayes;
mod crf;
mod enumerate;
mod factor_graph;
mod markov;

pub use bayes::{cpd_from_rows, cpd_rows, BayesianNetwork};
pub use crf::ChainCrf;
pub use enumerate::{
    enumerate_inference, enumerate_joint, enumerate_map, enumerate_marginal, enumerate_partition, Enumeration,
    EnumerationMode, DEFAULT_CAP,
};
pub use factor_graph::{FactorGraph, FgNode};
pub use markov::MarkovRandomField;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::factor::{same_variable, Evidence, Var};
use crate::graph::UndirectedGraph;
use crate::Factor;

/// Anything defined by a variable list and a product of factors.
pub trait FactorModel {
    fn variables(&self) -> &[Var];

    fn factors(&self) -> &[Factor];

    /// True when the factor product is already normalized (Bayesian networks).
    fn is_normalized(&self) -> bool {
        false
    }

    /// The model as a Bayesian network, when it is one.
    fn bayesian(&self) -> Option<&BayesianNetwork> {
        None
    }

    fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables().iter().position(|v| v.name() == name).ok_or_else(|| Error::Lookup(name.to_string()))
    }

    fn variable(&self, name: &str) -> Result<&Var> {
        Ok(&self.variables()[self.variable_index(name)?])
    }

    fn variable_names(&self) -> Vec<&str> {
        self.variables().iter().map(|v| v.name()).collect()
    }

    /// Graph with an edge between every pair of variables sharing a factor.
    fn interaction_graph(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.variables().iter().map(|v| v.name()));
        for f in self.factors() {
            let names = f.names();
            for (k, a) in names.iter().enumerate() {
                for b in &names[k + 1..] {
                    g.add_edge(a, b).expect("factor scopes have distinct known variables");
                }
            }
        }
        g
    }

    /// Evidence from `(variable, state label)` pairs.
    fn evidence(&self, pairs: &[(&str, &str)]) -> Result<Evidence> {
        let mut ev = Evidence::new();
        for &(name, label) in pairs {
            let v = self.variable(name).map_err(|_| Error::Evidence(format!("unknown variable `{name}`")))?;
            ev.insert(name.to_string(), v.state_index(label)?);
        }
        Ok(ev)
    }

    /// Positions of each factor's scope variables within `variables()`.
    fn scope_indices(&self) -> Vec<Vec<usize>> {
        self.factors()
            .iter()
            .map(|f| f.names().iter().map(|n| self.variable_index(n).expect("scope checked")).collect())
            .collect()
    }
}

/// Either kind of model loaded from a document.
#[derive(Debug, Clone)]
pub enum Model {
    Bayesian(BayesianNetwork),
    Markov(MarkovRandomField),
}

impl FactorModel for Model {
    fn variables(&self) -> &[Var] {
        match self {
            Model::Bayesian(m) => m.variables(),
            Model::Markov(m) => m.variables(),
        }
    }

    fn factors(&self) -> &[Factor] {
        match self {
            Model::Bayesian(m) => m.factors(),
            Model::Markov(m) => m.factors(),
        }
    }

    fn is_normalized(&self) -> bool {
        matches!(self, Model::Bayesian(_))
    }

    fn bayesian(&self) -> Option<&BayesianNetwork> {
        self.as_bayesian()
    }
}

impl Model {
    pub fn validate(&self) -> Vec<Violation> {
        match self {
            Model::Bayesian(m) => m.validate(),
            Model::Markov(m) => m.validate(),
        }
    }

    pub fn as_bayesian(&self) -> Option<&BayesianNetwork> {
        match self {
            Model::Bayesian(m) => Some(m),
            Model::Markov(_) => None,
        }
    }

    /// The model as a Markov random field (Bayesian networks are converted).
    pub fn to_markov(&self) -> MarkovRandomField {
        match self {
            Model::Bayesian(m) => m.to_mrf(),
            Model::Markov(m) => m.clone(),
        }
    }
}

/// One broken invariant, naming the offending variable or factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

pub(crate) fn check_variables(variables: &[Var]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in variables {
        if !seen.insert(v.name()) {
            return Err(Error::InvalidModel(format!("variable `{}` declared twice", v.name())));
        }
    }
    Ok(())
}

pub(crate) fn check_factor_scope(variables: &[Var], f: &Factor) -> Result<()> {
    for v in f.scope() {
        let decl = variables
            .iter()
            .find(|w| w.name() == v.name())
            .ok_or_else(|| Error::InvalidModel(format!("factor uses undeclared variable `{}`", v.name())))?;
        if !same_variable(decl, v) {
            return Err(Error::IncompatibleVariable(v.name().to_string()));
        }
    }
    Ok(())
}

pub(crate) fn factor_violations(f: &Factor, subject: &str, out: &mut Vec<Violation>) {
    if f.values().iter().any(|x| !x.is_finite() || *x < 0.0) {
        out.push(Violation { subject: subject.to_string(), rule: "entries must be finite and nonnegative".into() });
    }
}

/// Sum of log factor entries at a full assignment given in model variable order.
///
/// For a Bayesian network this is the log-probability; for a Markov random
/// field it is the unnormalized log-score. Zero entries give `-inf`.
pub fn log_joint<M: FactorModel + ?Sized>(model: &M, assignment: &[usize]) -> Result<f64> {
    let vars = model.variables();
    if assignment.len() != vars.len() {
        return Err(Error::Argument(format!(
            "assignment has {} values for {} variables",
            assignment.len(),
            vars.len()
        )));
    }
    for (v, &s) in vars.iter().zip(assignment) {
        if s >= v.cardinality() {
            return Err(Error::Argument(format!("state {s} out of range for `{}`", v.name())));
        }
    }
    Ok(log_joint_unchecked(model.factors(), &model.scope_indices(), assignment))
}

pub(crate) fn log_joint_unchecked(factors: &[Factor], scopes: &[Vec<usize>], assignment: &[usize]) -> f64 {
    let mut total = 0.0;
    for (f, sc) in factors.iter().zip(scopes) {
        let mut idx = 0;
        for (v, &i) in f.scope().iter().zip(sc) {
            idx = idx * v.cardinality() + assignment[i];
        }
        total += f.values()[idx].ln();
    }
    total
}

/// Log joint from a named assignment covering every variable.
pub fn log_joint_named<M: FactorModel + ?Sized>(model: &M, assignment: &Evidence) -> Result<f64> {
    let full: Vec<usize> = model
        .variables()
        .iter()
        .map(|v| {
            assignment.get(v.name()).copied().ok_or_else(|| Error::Argument(format!("assignment misses `{}`", v.name())))
        })
        .collect::<Result<_>>()?;
    log_joint(model, &full)
}

/// Check that every evidence variable exists and every state is in range.
pub fn check_evidence<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<()> {
    for (name, &s) in evidence {
        let v = model.variable(name).map_err(|_| Error::Evidence(format!("unknown variable `{name}`")))?;
        if s >= v.cardinality() {
            return Err(Error::Evidence(format!("state {s} out of range for `{name}`")));
        }
    }
    Ok(())
}

impl From<MarkovRandomField> for Model {
    fn from(m: MarkovRandomField) -> Self {
        Model::Markov(m)
    }
}

impl From<BayesianNetwork> for Model {
    fn from(m: BayesianNetwork) -> Self {
        Model::Bayesian(m)
    }
}
