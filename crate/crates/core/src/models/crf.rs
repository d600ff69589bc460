use super::MarkovRandomField;
use crate::error::{Error, Result};
use crate::factor::{Var, Variable};
use crate::Factor;

/// Linear-chain conditional random field.
///
/// Features are per-position emissions `x_i[k]·[y_i = a]` and transitions
/// `[y_{i-1} = a, y_i = b]`. Weights are laid out emissions first
/// (`a * F + k`), then transitions (`K * F + a * K + b`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCrf {
    labels: Vec<String>,
    num_features: usize,
    weights: Vec<f64>,
}

impl ChainCrf {
    pub fn new(labels: Vec<String>, num_features: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Argument("a CRF needs at least one label".into()));
        }
        let k = labels.len();
        Ok(ChainCrf { labels, num_features, weights: vec![0.0; k * num_features + k * k] })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, w: Vec<f64>) -> Result<()> {
        if w.len() != self.weights.len() {
            return Err(Error::Shape(format!("expected {} weights, got {}", self.weights.len(), w.len())));
        }
        self.weights = w;
        Ok(())
    }

    pub fn emission_index(&self, label: usize, feature: usize) -> usize {
        label * self.num_features + feature
    }

    pub fn transition_index(&self, prev: usize, next: usize) -> usize {
        let k = self.labels.len();
        k * self.num_features + prev * k + next
    }

    pub fn check_input(&self, x: &[Vec<f64>]) -> Result<()> {
        if x.is_empty() {
            return Err(Error::Argument("sequence must have length at least 1".into()));
        }
        for (i, row) in x.iter().enumerate() {
            if row.len() != self.num_features {
                return Err(Error::Feature(format!("position {i} has {} features, expected {}", row.len(), self.num_features)));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Feature(format!("non-finite feature at position {i}")));
            }
        }
        Ok(())
    }

    /// Global feature vector f(x, y).
    pub fn features(&self, x: &[Vec<f64>], y: &[usize]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if y.len() != x.len() || y.iter().any(|&a| a >= self.labels.len()) {
            return Err(Error::Argument("label sequence does not match the input".into()));
        }
        let mut f = vec![0.0; self.weights.len()];
        for (i, (row, &a)) in x.iter().zip(y).enumerate() {
            for (k, &v) in row.iter().enumerate() {
                f[self.emission_index(a, k)] += v;
            }
            if i > 0 {
                f[self.transition_index(y[i - 1], a)] += 1.0;
            }
        }
        Ok(f)
    }

    /// Unnormalized log-score θ·f(x, y).
    pub fn score(&self, x: &[Vec<f64>], y: &[usize]) -> Result<f64> {
        Ok(self.features(x, y)?.iter().zip(&self.weights).map(|(f, w)| f * w).sum())
    }

    /// Label variable for position `i`.
    pub fn position_variable(&self, i: usize) -> Result<Var> {
        Variable::new(format!("y{i:04}"), self.labels.iter().cloned())
    }

    /// Chain MRF over the labels for one input: p(y|x) is its normalized product.
    pub fn to_mrf(&self, x: &[Vec<f64>]) -> Result<MarkovRandomField> {
        self.check_input(x)?;
        let k = self.labels.len();
        let vars: Vec<Var> = (0..x.len()).map(|i| self.position_variable(i)).collect::<Result<_>>()?;
        let mut factors = Vec::new();
        for (i, row) in x.iter().enumerate() {
            let values = (0..k)
                .map(|a| row.iter().enumerate().map(|(f, v)| self.weights[self.emission_index(a, f)] * v).sum::<f64>().exp())
                .collect();
            factors.push(Factor::new(vec![vars[i].clone()], values)?);
            if i > 0 {
                let values = (0..k * k).map(|ab| self.weights[self.transition_index(ab / k, ab % k)].exp()).collect();
                factors.push(Factor::new(vec![vars[i - 1].clone(), vars[i].clone()], values)?);
            }
        }
        MarkovRandomField::new(vars, factors)
    }
}
