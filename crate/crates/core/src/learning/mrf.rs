use std::collections::BTreeMap;

use super::Dataset;
use crate::error::{Error, Result};
use crate::exact::{build_junction_tree, JunctionTree};
use crate::models::{FactorModel, MarkovRandomField};
use crate::{Evidence, Factor, Semiring};

/// Gradient-ascent settings. The step at iteration `t` is
/// `learning_rate / (1 + decay·t)`, halved whenever a step would lower the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfFitOptions {
    pub learning_rate: f64,
    pub decay: f64,
    pub max_iters: usize,
    /// Stop when the gradient's largest entry falls below this.
    pub tol: f64,
    pub l2: f64,
}

impl Default for MrfFitOptions {
    fn default() -> Self {
        MrfFitOptions { learning_rate: 1.0, decay: 0.0, max_iters: 50_000, tol: 1e-8, l2: 1e-8 }
    }
}

/// Fitted log-potentials `θ_f = log φ_f` for every factor of the structure.
#[derive(Debug, Clone)]
pub struct MrfFit {
    pub model: MarkovRandomField,
    pub theta: Vec<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Largest |empirical − model| factor moment; maximum-likelihood fits only.
    pub max_moment_gap: Option<f64>,
}

fn columns(mrf: &MarkovRandomField, d: &Dataset) -> Result<Vec<Vec<usize>>> {
    mrf.factors().iter().map(|f| f.names().iter().map(|n| d.column(n)).collect()).collect()
}

fn config(f: &Factor, cols: &[usize], row: &[usize]) -> usize {
    cols.iter().zip(f.scope()).fold(0, |acc, (&c, v)| acc * v.cardinality() + row[c])
}

fn empirical_moments(mrf: &MarkovRandomField, d: &Dataset) -> Result<Vec<Vec<f64>>> {
    if d.is_empty() {
        return Err(Error::InsufficientData("cannot fit to an empty dataset".into()));
    }
    let cols = columns(mrf, d)?;
    let mut out: Vec<Vec<f64>> = mrf.factors().iter().map(|f| vec![0.0; f.len()]).collect();
    for row in d.rows() {
        for (k, f) in mrf.factors().iter().enumerate() {
            out[k][config(f, &cols[k], row)] += 1.0;
        }
    }
    let n = d.len() as f64;
    for m in &mut out {
        m.iter_mut().for_each(|x| *x /= n);
    }
    Ok(out)
}

fn with_theta(mrf: &MarkovRandomField, theta: &[Vec<f64>]) -> Result<Vec<Factor>> {
    mrf.factors().iter().zip(theta).map(|(f, t)| Factor::new(f.scope().to_vec(), t.iter().map(|x| x.exp()).collect())).collect()
}

/// Factor moments under the model, and log Z, from a calibrated junction tree.
fn model_moments(jt: &JunctionTree) -> Result<(Vec<Vec<f64>>, f64)> {
    let beliefs = jt.beliefs()?;
    let n_factors = jt.assignment().iter().map(|a| a.len()).sum();
    let mut out = vec![Vec::new(); n_factors];
    for (c, assigned) in jt.assignment().iter().enumerate() {
        let z = beliefs[c].total();
        for &fi in assigned {
            let scope = jt_factor_names(jt, fi);
            let names: Vec<&str> = scope.iter().map(String::as_str).collect();
            let m = beliefs[c].marginal(&names, Semiring::SumProduct)?.permute(&names)?;
            out[fi] = m.values().iter().map(|x| x / z).collect();
        }
    }
    Ok((out, jt.log_partition()?))
}

fn jt_factor_names(jt: &JunctionTree, fi: usize) -> Vec<String> {
    jt.factors()[fi].names().iter().map(|s| s.to_string()).collect()
}

fn sq_norm(theta: &[Vec<f64>]) -> f64 {
    theta.iter().flatten().map(|x| x * x).sum()
}

fn inf_norm(g: &[Vec<f64>]) -> f64 {
    g.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

fn evaluate(
    base: &JunctionTree,
    mrf: &MarkovRandomField,
    emp: &[Vec<f64>],
    theta: &[Vec<f64>],
    l2: f64,
) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut jt = base.with_factors(with_theta(mrf, theta)?)?;
    jt.calibrate(&Evidence::new(), Semiring::SumProduct)?;
    let (model, log_z) = model_moments(&jt)?;
    let mut value = -log_z - 0.5 * l2 * sq_norm(theta);
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        value += emp[k].iter().zip(&theta[k]).map(|(e, t)| if *e > 0.0 { e * t } else { 0.0 }).sum::<f64>();
        grad.push((0..theta[k].len()).map(|c| emp[k][c] - model[k][c] - l2 * theta[k][c]).collect());
    }
    Ok((value, grad, model))
}

/// Average log-likelihood (minus the L2 penalty) of `θ` and its gradient.
pub fn mrf_objective(mrf: &MarkovRandomField, d: &Dataset, theta: &[Vec<f64>], l2: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    check_theta(mrf, theta)?;
    let emp = empirical_moments(mrf, d)?;
    let jt = build_junction_tree(mrf)?;
    let (v, g, _) = evaluate(&jt, mrf, &emp, theta, l2)?;
    Ok((v, g))
}

fn check_theta(mrf: &MarkovRandomField, theta: &[Vec<f64>]) -> Result<()> {
    if theta.len() != mrf.factors().len() || theta.iter().zip(mrf.factors()).any(|(t, f)| t.len() != f.len()) {
        return Err(Error::Shape("θ must have one entry per factor table cell".into()));
    }
    Ok(())
}

fn zero_theta(mrf: &MarkovRandomField) -> Vec<Vec<f64>> {
    mrf.factors().iter().map(|f| vec![0.0; f.len()]).collect()
}

fn ascend(
    opts: &MrfFitOptions,
    theta: &mut Vec<Vec<f64>>,
    mut eval: impl FnMut(&[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)>,
) -> Result<(f64, Vec<Vec<f64>>, usize, bool)> {
    let (mut value, mut grad) = eval(theta)?;
    let mut shrink = 1.0;
    let mut iters = 0;
    while iters < opts.max_iters {
        if inf_norm(&grad) < opts.tol {
            return Ok((value, grad, iters, true));
        }
        let step = shrink * opts.learning_rate / (1.0 + opts.decay * iters as f64);
        let candidate: Vec<Vec<f64>> =
            theta.iter().zip(&grad).map(|(t, g)| t.iter().zip(g).map(|(a, b)| a + step * b).collect()).collect();
        let (v, g) = eval(&candidate)?;
        iters += 1;
        if v + 1e-15 >= value {
            *theta = candidate;
            value = v;
            grad = g;
        } else {
            shrink *= 0.5;
            if shrink < 1e-12 {
                break;
            }
        }
    }
    let converged = inf_norm(&grad) < opts.tol;
    Ok((value, grad, iters, converged))
}

/// Maximum-likelihood fit of the structure's factor tables by gradient ascent
/// from θ = 0, with exact moments from one junction tree.
pub fn fit_mrf(structure: &MarkovRandomField, d: &Dataset, opts: &MrfFitOptions) -> Result<MrfFit> {
    let emp = empirical_moments(structure, d)?;
    if opts.l2 == 0.0 && emp.iter().flatten().any(|&e| e == 0.0) {
        log::warn!("an empirical moment is zero and there is no L2 penalty; its parameter diverges");
    }
    let jt = build_junction_tree(structure)?;
    let mut theta = zero_theta(structure);
    let (objective, grad, iterations, converged) = ascend(opts, &mut theta, |t| {
        let (v, g, _) = evaluate(&jt, structure, &emp, t, opts.l2)?;
        Ok((v, g))
    })?;
    let (_, _, model) = evaluate(&jt, structure, &emp, &theta, opts.l2)?;
    let gap = emp.iter().flatten().zip(model.iter().flatten()).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
    Ok(MrfFit {
        model: structure.with_factors(with_theta(structure, &theta)?)?,
        theta,
        objective,
        iterations,
        converged,
        gradient_norm: inf_norm(&grad),
        max_moment_gap: Some(gap),
    })
}

/// Σ over rows and variables of `log p(x_i | rest)` under `θ`, and its gradient.
pub fn pseudo_likelihood(mrf: &MarkovRandomField, d: &Dataset, theta: &[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> {
    check_theta(mrf, theta)?;
    let cols = columns(mrf, d)?;
    let vars = mrf.variables();
    let var_cols: Vec<usize> = vars.iter().map(|v| d.column(v.name())).collect::<Result<_>>()?;
    let scopes = mrf.scope_indices();
    let touching: Vec<Vec<usize>> =
        (0..vars.len()).map(|i| (0..scopes.len()).filter(|&f| scopes[f].contains(&i)).collect()).collect();
    let mut value = 0.0;
    let mut grad = zero_theta(mrf);
    let mut distinct: BTreeMap<&[usize], f64> = BTreeMap::new();
    for r in d.rows() {
        *distinct.entry(r.as_slice()).or_default() += 1.0;
    }
    let mut row = vec![0; d.variables().len()];
    for (data_row, weight) in distinct {
        row.copy_from_slice(data_row);
        for (i, v) in vars.iter().enumerate() {
            let c = var_cols[i];
            let observed = row[c];
            let k = v.cardinality();
            let mut logits = vec![0.0; k];
            let mut idx = vec![vec![0; touching[i].len()]; k];
            for s in 0..k {
                row[c] = s;
                for (t, &f) in touching[i].iter().enumerate() {
                    let j = config(&mrf.factors()[f], &cols[f], &row);
                    idx[s][t] = j;
                    logits[s] += theta[f][j];
                }
            }
            row[c] = observed;
            let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
            value += weight * (logits[observed] - lse);
            for s in 0..k {
                let p = weight * (logits[s] - lse).exp();
                for (t, &f) in touching[i].iter().enumerate() {
                    grad[f][idx[s][t]] -= p;
                }
            }
            for (t, &f) in touching[i].iter().enumerate() {
                grad[f][idx[observed][t]] += weight;
            }
        }
    }
    Ok((value, grad))
}

/// Maximize the average pseudo-likelihood (minus the L2 penalty) from θ = 0.
pub fn fit_mrf_pseudo_likelihood(structure: &MarkovRandomField, d: &Dataset, opts: &MrfFitOptions) -> Result<MrfFit> {
    if d.is_empty() {
        return Err(Error::InsufficientData("cannot fit to an empty dataset".into()));
    }
    let n = d.len() as f64;
    let mut theta = zero_theta(structure);
    let (objective, grad, iterations, converged) = ascend(opts, &mut theta, |t| {
        let (v, mut g) = pseudo_likelihood(structure, d, t)?;
        for (gk, tk) in g.iter_mut().zip(t) {
            for (a, b) in gk.iter_mut().zip(tk) {
                *a = *a / n - opts.l2 * b;
            }
        }
        Ok((v / n - 0.5 * opts.l2 * sq_norm(t), g))
    })?;
    Ok(MrfFit {
        model: structure.with_factors(with_theta(structure, &theta)?)?,
        theta,
        objective,
        iterations,
        converged,
        gradient_norm: inf_norm(&grad),
        max_moment_gap: None,
    })
}

/// Total log-likelihood of the rows under an MRF.
pub fn mrf_log_likelihood(mrf: &MarkovRandomField, d: &Dataset) -> Result<f64> {
    let mut jt = build_junction_tree(mrf)?;
    jt.calibrate(&Evidence::new(), Semiring::SumProduct)?;
    let log_z = jt.log_partition()?;
    let cols = columns(mrf, d)?;
    let mut total = 0.0;
    for row in d.rows() {
        for (k, f) in mrf.factors().iter().enumerate() {
            total += f.values()[config(f, &cols[k], row)].ln();
        }
        total -= log_z;
    }
    Ok(total)
}
