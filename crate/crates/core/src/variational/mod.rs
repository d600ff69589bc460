//! KL divergence, the evidence lower bound, mean field and loopy belief propagation.

mod loopy;
mod mean_field;

pub use loopy::{loopy_bp, LoopyOptions, LoopyResult, Schedule};
pub use mean_field::{mean_field, ElboTrace, MeanFieldOptions};

use crate::error::{Error, Result};
use crate::factor::Var;
use crate::models::FactorModel;
use crate::Factor;

/// `KL(q ‖ p) = Σ q log(q / p)` after normalizing both tables.
///
/// Entries with `q = 0` contribute nothing; `q > 0` where `p = 0` gives `+∞`.
pub fn kl_divergence(q: &Factor, p: &Factor) -> Result<f64> {
    let mut qn: Vec<&str> = q.names();
    let mut pn: Vec<&str> = p.names();
    qn.sort_unstable();
    pn.sort_unstable();
    if qn != pn {
        return Err(Error::Scope("KL divergence needs two tables over the same variables".into()));
    }
    let p = p.permute(&q.names())?;
    let (zq, zp) = (q.total(), p.total());
    if !(zq > 0.0) || !(zp > 0.0) {
        return Err(Error::Degenerate("distribution with zero total mass".into()));
    }
    let mut kl = 0.0;
    for (&a, &b) in q.values().iter().zip(p.values()) {
        let (a, b) = (a / zq, b / zp);
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            kl += a * (a / b).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// Fully factored distribution `q(x) = Π q_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredDistribution {
    variables: Vec<Var>,
    tables: Vec<Vec<f64>>,
}

impl FactoredDistribution {
    /// Each table must be nonnegative and sum to 1 within 1e-12.
    pub fn new(variables: Vec<Var>, tables: Vec<Vec<f64>>) -> Result<Self> {
        if variables.len() != tables.len() {
            return Err(Error::Shape(format!("{} tables for {} variables", tables.len(), variables.len())));
        }
        for (v, t) in variables.iter().zip(&tables) {
            if t.len() != v.cardinality() {
                return Err(Error::LengthMismatch { factor: v.name().to_string(), found: t.len(), expected: v.cardinality() });
            }
            let s: f64 = t.iter().sum();
            if t.iter().any(|x| !(*x >= 0.0)) || (s - 1.0).abs() > 1e-12 {
                return Err(Error::Argument(format!("q for `{}` is not a distribution", v.name())));
            }
        }
        Ok(FactoredDistribution { variables, tables })
    }

    pub fn uniform(variables: Vec<Var>) -> Self {
        let tables = variables.iter().map(|v| vec![1.0 / v.cardinality() as f64; v.cardinality()]).collect();
        FactoredDistribution { variables, tables }
    }

    pub fn variables(&self) -> &[Var] {
        &self.variables
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn get(&self, name: &str) -> Result<&[f64]> {
        let i = self.variables.iter().position(|v| v.name() == name).ok_or_else(|| Error::Lookup(name.to_string()))?;
        Ok(&self.tables[i])
    }

    pub(crate) fn set(&mut self, i: usize, t: Vec<f64>) {
        self.tables[i] = t;
    }

    pub fn entropy(&self) -> f64 {
        self.tables.iter().flatten().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }

    /// The product as one joint table.
    pub fn joint(&self) -> Result<Factor> {
        let mut out = Factor::ones(vec![])?;
        for (v, t) in self.variables.iter().zip(&self.tables) {
            out = out.product(&Factor::new(vec![v.clone()], t.clone())?)?;
        }
        Ok(out)
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name() == name)
    }
}

/// `E_q[log φ]` for one factor, with `0 · log 0 = 0`.
pub(crate) fn expected_log(f: &Factor, q: &FactoredDistribution, qidx: &[usize]) -> f64 {
    let mut total = 0.0;
    for (k, &phi) in f.values().iter().enumerate() {
        let states = f.states_of(k);
        let w: f64 = qidx.iter().zip(&states).map(|(&i, &s)| q.tables[i][s]).product();
        if w > 0.0 {
            total += w * phi.ln();
        }
    }
    total
}

/// `E_q[Σ_c log φ_c] + H(q)`, one clique at a time.
///
/// Bounds `log Z` from below, with equality exactly when `q` is the model's
/// distribution.
pub fn elbo<M: FactorModel + ?Sized>(model: &M, q: &FactoredDistribution) -> Result<f64> {
    let mut total = q.entropy();
    for f in model.factors() {
        let qidx: Vec<usize> = f
            .names()
            .iter()
            .map(|n| q.index_of(n).ok_or_else(|| Error::Scope(format!("q does not cover `{n}`"))))
            .collect::<Result<_>>()?;
        total += expected_log(f, q, &qidx);
    }
    Ok(total)
}
