use super::{check_factor_scope, check_variables, factor_violations, FactorModel, MarkovRandomField, Violation};
use crate::error::{Error, Result};
use crate::factor::{Var, Variable};
use crate::graph::DirectedGraph;
use crate::Factor;

/// Bayesian network: one conditional table per variable.
///
/// Each table's scope is `(child, parents...)`. Tables are usually written
/// as rows indexed by parent configuration with the child varying fastest;
/// see [`cpd_from_rows`] and [`cpd_rows`].
#[derive(Debug, Clone)]
pub struct BayesianNetwork {
    variables: Vec<Var>,
    dag: DirectedGraph,
    cpds: Vec<Factor>,
}

impl BayesianNetwork {
    /// Build from variables and one table per variable (any order).
    ///
    /// Only structural problems are rejected here; numeric and acyclicity
    /// problems are reported by [`BayesianNetwork::validate`].
    pub fn new(variables: Vec<Var>, cpds: Vec<Factor>) -> Result<Self> {
        check_variables(&variables)?;
        let mut ordered: Vec<Option<Factor>> = vec![None; variables.len()];
        for f in cpds {
            check_factor_scope(&variables, &f)?;
            let child = f
                .scope()
                .first()
                .ok_or_else(|| Error::InvalidModel("conditional table with empty scope".into()))?
                .name()
                .to_string();
            let i = variables.iter().position(|v| v.name() == child).expect("scope checked");
            if ordered[i].is_some() {
                return Err(Error::InvalidModel(format!("`{child}` has two conditional tables")));
            }
            ordered[i] = Some(f);
        }
        let cpds: Vec<Factor> = ordered
            .into_iter()
            .zip(&variables)
            .map(|(f, v)| f.ok_or_else(|| Error::InvalidModel(format!("`{}` has no conditional table", v.name()))))
            .collect::<Result<_>>()?;
        let mut dag = DirectedGraph::new(variables.iter().map(|v| v.name()));
        for f in &cpds {
            let child = f.scope()[0].name();
            for p in &f.scope()[1..] {
                dag.add_edge(p.name(), child)?;
            }
        }
        Ok(BayesianNetwork { variables, dag, cpds })
    }

    /// Convenience builder from labels: `(name, states)` and `(child, parents, table)`.
    pub fn from_tables(variables: &[(&str, &[&str])], cpds: &[(&str, &[&str], Vec<f64>)]) -> Result<Self> {
        let vars: Vec<Var> = variables.iter().map(|(n, s)| Variable::new(*n, s.iter().copied())).collect::<Result<_>>()?;
        let find = |n: &str| {
            vars.iter().find(|v| v.name() == n).cloned().ok_or_else(|| Error::Lookup(n.to_string()))
        };
        let mut tables = Vec::new();
        for (child, parents, values) in cpds {
            let parents: Vec<Var> = parents.iter().map(|p| find(p)).collect::<Result<_>>()?;
            tables.push(cpd_from_rows(find(child)?, parents, values.clone())?);
        }
        BayesianNetwork::new(vars, tables)
    }

    pub fn dag(&self) -> &DirectedGraph {
        &self.dag
    }

    pub fn cpds(&self) -> &[Factor] {
        &self.cpds
    }

    pub fn cpd(&self, name: &str) -> Result<&Factor> {
        Ok(&self.cpds[self.variable_index(name)?])
    }

    /// Parent names of a variable, in table order.
    pub fn parents_of(&self, name: &str) -> Result<Vec<&str>> {
        Ok(self.cpd(name)?.scope()[1..].iter().map(|v| v.name()).collect())
    }

    /// Variable indices in topological order (ties by name).
    pub fn topological_indices(&self) -> Result<Vec<usize>> {
        let order = self.dag.topological_sort()?;
        order.iter().map(|n| self.variable_index(n)).collect()
    }

    /// Replace the table of one variable, keeping its scope.
    pub fn with_cpd(&self, cpd: Factor) -> Result<Self> {
        let i = self.variable_index(cpd.scope().first().map(|v| v.name()).unwrap_or(""))?;
        if cpd.names() != self.cpds[i].names() {
            return Err(Error::Scope("replacement table must keep the scope".into()));
        }
        let mut out = self.clone();
        out.cpds[i] = cpd;
        Ok(out)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Some(cycle) = self.dag.find_cycle() {
            out.push(Violation { subject: cycle.join(" -> "), rule: "graph must be acyclic".into() });
        }
        for (v, f) in self.variables.iter().zip(&self.cpds) {
            let subject = format!("p({})", v.name());
            factor_violations(f, &subject, &mut out);
            for (r, row) in cpd_rows(f).iter().enumerate() {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    out.push(Violation {
                        subject: subject.clone(),
                        rule: format!("row {r} sums to {s}, expected 1"),
                    });
                }
            }
        }
        out
    }

    /// Markov random field with one factor per conditional table.
    pub fn to_mrf(&self) -> MarkovRandomField {
        MarkovRandomField::new(self.variables.clone(), self.cpds.clone()).expect("same variables and scopes")
    }
}

impl FactorModel for BayesianNetwork {
    fn variables(&self) -> &[Var] {
        &self.variables
    }

    fn factors(&self) -> &[Factor] {
        &self.cpds
    }

    fn is_normalized(&self) -> bool {
        true
    }

    fn bayesian(&self) -> Option<&BayesianNetwork> {
        Some(self)
    }
}

/// Conditional table with scope `(child, parents...)` from rows ordered by
/// parent configuration (first parent slowest), the child varying fastest
/// within a row.
pub fn cpd_from_rows(child: Var, parents: Vec<Var>, rows: Vec<f64>) -> Result<Factor> {
    let mut scope = parents;
    scope.push(child);
    let f = Factor::new(scope, rows)?;
    let names = f.names();
    let mut order = vec![names[names.len() - 1]];
    order.extend_from_slice(&names[..names.len() - 1]);
    f.permute(&order)
}

/// Inverse of [`cpd_from_rows`]: one row per parent configuration.
pub fn cpd_rows(f: &Factor) -> Vec<Vec<f64>> {
    let names = f.names();
    if names.is_empty() {
        return vec![f.values().to_vec()];
    }
    let mut order: Vec<&str> = names[1..].to_vec();
    order.push(names[0]);
    let t = f.permute(&order).expect("same scope");
    t.values().chunks(f.scope()[0].cardinality()).map(|c| c.to_vec()).collect()
}
