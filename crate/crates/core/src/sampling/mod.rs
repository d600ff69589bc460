//! Monte Carlo estimation and Markov-chain tools.

mod chain;
mod forward;
mod importance;
mod mcmc;

pub use chain::{chain_analysis, gibbs_transition_matrix, mh_transition_matrix, ChainDiagnostics, TransitionMatrix};
pub use forward::{forward_sample, jt_forward_sample, rejection_estimate, RejectionEstimate};
pub use importance::{importance_estimate, ImportanceEstimate, Proposal};
pub use mcmc::{
    full_conditional, gibbs, gibbs_with, metropolis_hastings, mixing_diagnostic, GibbsOptions, GibbsSiteKernel,
    IndependentKernel, MixingDiagnostic, ProposalKernel, SingleFlipUniform,
};

use std::io::Write;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::factor::Var;
use crate::random::{seeded, Rng};

/// Seeded generator owned by one chain or sampler.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, rng: seeded(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for chain `id`, derived from this source's seed.
    pub fn fork(&self, id: u64) -> RandomSource {
        RandomSource::new(self.seed ^ id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn rng(&mut self) -> &mut Rng {
        &mut self.rng
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    /// Uniform index below `n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Index drawn proportionally to nonnegative `weights`; `None` when they sum to zero.
    pub fn categorical(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let u = self.uniform() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last = Some(i);
                if u < acc {
                    return Some(i);
                }
            }
        }
        last
    }
}

/// Joint samples over a fixed variable list, with optional weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub variables: Vec<Var>,
    pub assignments: Vec<Vec<usize>>,
    pub weights: Option<Vec<f64>>,
    pub seed: u64,
    pub burn_in: usize,
    pub chain_id: usize,
    /// Fraction of accepted proposals, for Metropolis-Hastings chains.
    pub acceptance_rate: Option<f64>,
}

impl SampleBatch {
    pub(crate) fn new(variables: Vec<Var>, seed: u64) -> Self {
        SampleBatch { variables, assignments: Vec::new(), weights: None, seed, burn_in: 0, chain_id: 0, acceptance_rate: None }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables.iter().position(|v| v.name() == name).ok_or_else(|| Error::Lookup(name.to_string()))
    }

    /// Empirical (weighted when weights exist) distribution of one variable.
    pub fn marginal(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.variable_index(name)?;
        let mut counts = vec![0.0; self.variables[i].cardinality()];
        for (k, x) in self.assignments.iter().enumerate() {
            counts[x[i]] += self.weights.as_ref().map_or(1.0, |w| w[k]);
        }
        let total: f64 = counts.iter().sum();
        if total > 0.0 {
            for c in &mut counts {
                *c /= total;
            }
        }
        Ok(counts)
    }

    /// Append another batch over the same variables.
    pub fn merge(&mut self, other: SampleBatch) -> Result<()> {
        if self.variables.len() != other.variables.len()
            || self.variables.iter().zip(&other.variables).any(|(a, b)| a.name() != b.name())
        {
            return Err(Error::Argument("batches cover different variables".into()));
        }
        match (&mut self.weights, other.weights) {
            (None, None) => {}
            (Some(w), Some(o)) => w.extend(o),
            _ => return Err(Error::Argument("cannot merge weighted and unweighted batches".into())),
        }
        self.assignments.extend(other.assignments);
        Ok(())
    }

    /// CSV with a header of variable names, state labels per row and a final
    /// `weight` column for weighted batches.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.variables.iter().map(|v| v.name()).collect();
        if self.weights.is_some() {
            header.push("weight");
        }
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for (k, x) in self.assignments.iter().enumerate() {
            let mut row: Vec<String> =
                x.iter().zip(&self.variables).map(|(&s, v)| v.state_label(s).unwrap_or_default().to_string()).collect();
            if let Some(ws) = &self.weights {
                row.push(format!("{:.16e}", ws[k]));
            }
            w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
