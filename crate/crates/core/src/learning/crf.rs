use crate::error::{Error, Result};
use crate::exact::tree_bp;
use crate::models::ChainCrf;
use crate::Evidence;

/// Input feature rows and their label indices.
pub type LabeledSequence = (Vec<Vec<f64>>, Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct CrfOptions {
    pub l2: f64,
    pub steps: usize,
    /// Initial step; adapted by backtracking.
    pub learning_rate: f64,
}

impl Default for CrfOptions {
    fn default() -> Self {
        CrfOptions { l2: 1e-2, steps: 100, learning_rate: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct CrfFit {
    pub crf: ChainCrf,
    /// Loss before training, then after each accepted step.
    pub losses: Vec<f64>,
}

/// Negative conditional log-likelihood plus `l2/2·‖θ‖²`, and its gradient.
///
/// Expected features come from sum-product on each input's chain, so the
/// normalizer is recomputed per sequence.
pub fn crf_objective(crf: &ChainCrf, data: &[LabeledSequence], l2: f64) -> Result<(f64, Vec<f64>)> {
    let w = crf.weights();
    let k = crf.num_labels();
    let mut loss = 0.5 * l2 * w.iter().map(|x| x * x).sum::<f64>();
    let mut grad: Vec<f64> = w.iter().map(|x| l2 * x).collect();
    for (x, y) in data {
        let observed = crf.features(x, y)?;
        let mrf = crf.to_mrf(x)?;
        let bp = tree_bp(&mrf, &Evidence::new())?;
        let score: f64 = observed.iter().zip(w).map(|(f, t)| f * t).sum();
        loss -= score - bp.log_partition();
        for (g, f) in grad.iter_mut().zip(&observed) {
            *g -= f;
        }
        for (i, row) in x.iter().enumerate() {
            let p = bp.marginal(&format!("y{i:04}"))?.values().to_vec();
            for (a, pa) in p.iter().enumerate() {
                for (f, v) in row.iter().enumerate() {
                    grad[crf.emission_index(a, f)] += pa * v;
                }
            }
            if i > 0 {
                let pair = bp.factor_belief(2 * i)?;
                for (ab, q) in pair.values().iter().enumerate() {
                    grad[crf.transition_index(ab / k, ab % k)] += q;
                }
            }
        }
    }
    if !loss.is_finite() {
        return Err(Error::Feature("objective is not finite".into()));
    }
    Ok((loss, grad))
}

/// L2-regularized conditional likelihood training by gradient descent with
/// backtracking, so every accepted step lowers the loss.
pub fn fit_chain_crf(crf: &ChainCrf, data: &[LabeledSequence], opts: &CrfOptions) -> Result<CrfFit> {
    if data.is_empty() {
        return Err(Error::InsufficientData("no training sequences".into()));
    }
    let mut model = crf.clone();
    let (mut loss, mut grad) = crf_objective(&model, data, opts.l2)?;
    let mut losses = vec![loss];
    let mut lr = opts.learning_rate;
    for _ in 0..opts.steps {
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = model.clone();
            trial.set_weights(model.weights().iter().zip(&grad).map(|(w, g)| w - lr * g).collect())?;
            let (l, g) = crf_objective(&trial, data, opts.l2)?;
            if l < loss {
                model = trial;
                loss = l;
                grad = g;
                lr *= 1.2;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            break;
        }
        losses.push(loss);
    }
    Ok(CrfFit { crf: model, losses })
}
