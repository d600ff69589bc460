use super::{check_factor_scope, check_variables, factor_violations, FactorModel, Violation};
use crate::error::Result;
use crate::factor::{Evidence, Var};
use crate::graph::UndirectedGraph;
use crate::Factor;

/// Markov random field: an unnormalized product of nonnegative factors.
#[derive(Debug, Clone)]
pub struct MarkovRandomField {
    variables: Vec<Var>,
    factors: Vec<Factor>,
}

impl MarkovRandomField {
    pub fn new(variables: Vec<Var>, factors: Vec<Factor>) -> Result<Self> {
        check_variables(&variables)?;
        for f in &factors {
            check_factor_scope(&variables, f)?;
        }
        Ok(MarkovRandomField { variables, factors })
    }

    /// Union of factor scopes as cliques.
    pub fn skeleton(&self) -> UndirectedGraph {
        self.interaction_graph()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (k, f) in self.factors.iter().enumerate() {
            factor_violations(f, &format!("factor {k} over ({})", f.names().join(", ")), &mut out);
        }
        out
    }

    /// Reduce every factor by the evidence and drop the observed variables.
    pub fn reduced(&self, evidence: &Evidence) -> Result<MarkovRandomField> {
        super::check_evidence(self, evidence)?;
        let variables = self.variables.iter().filter(|v| !evidence.contains_key(v.name())).cloned().collect();
        let factors = self.factors.iter().map(|f| f.reduce(evidence)).collect::<Result<_>>()?;
        Ok(MarkovRandomField { variables, factors })
    }

    pub fn with_factors(&self, factors: Vec<Factor>) -> Result<Self> {
        MarkovRandomField::new(self.variables.clone(), factors)
    }
}

impl FactorModel for MarkovRandomField {
    fn variables(&self) -> &[Var] {
        &self.variables
    }

    fn factors(&self) -> &[Factor] {
        &self.factors
    }
}
