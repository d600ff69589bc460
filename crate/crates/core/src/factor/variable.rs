use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A discrete random variable with named, ordered states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

/// Shared handle to a variable definition.
pub type Var = Arc<Variable>;

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Result<Var> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::Argument("variable name must not be empty".into()));
        }
        if states.is_empty() {
            return Err(Error::Argument(format!("variable `{name}` has no states")));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::Argument(format!("variable `{name}` repeats state `{s}`")));
            }
        }
        Ok(Arc::new(Variable { name, states }))
    }

    /// Variable with states labelled `0..card`.
    pub fn with_cardinality(name: impl Into<String>, card: usize) -> Result<Var> {
        Variable::new(name, (0..card).map(|s| s.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::Evidence(format!("`{label}` is not a state of `{}`", self.name)))
    }

    pub fn state_label(&self, index: usize) -> Result<&str> {
        self.states
            .get(index)
            .map(String::as_str)
            .ok_or_else(|| Error::Evidence(format!("state {index} out of range for `{}`", self.name)))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

pub(crate) fn same_variable(a: &Var, b: &Var) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
