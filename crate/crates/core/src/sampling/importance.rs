use super::{RandomSource, SampleBatch};
use crate::error::{Error, Result};
use crate::exact::variable_elimination;
use crate::factor::{Evidence, Semiring};
use crate::models::{check_evidence, log_joint, FactorModel};
use crate::Factor;

/// Proposal distribution over the unobserved variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Proposal {
    /// Uniform over every hidden variable's states.
    Uniform,
    /// Independent distribution per model variable (entries for observed variables are ignored).
    Factored(Vec<Vec<f64>>),
    /// Joint table over exactly the hidden variables.
    Joint(Factor),
}

/// Importance-sampling estimate and the weighted samples behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceEstimate {
    pub estimate: f64,
    /// `(Σw)² / Σw²`.
    pub effective_sample_size: f64,
    pub samples: SampleBatch,
}

enum Prepared {
    Uniform(Vec<usize>),
    Factored(Vec<Vec<f64>>),
    Joint { table: Vec<f64>, positions: Vec<usize>, factor: Factor },
}

fn prepare<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence, q: &Proposal) -> Result<Prepared> {
    let vars = model.variables();
    let hidden: Vec<usize> = (0..vars.len()).filter(|&i| !evidence.contains_key(vars[i].name())).collect();
    match q {
        Proposal::Uniform => Ok(Prepared::Uniform(hidden)),
        Proposal::Factored(dists) => {
            if dists.len() != vars.len() {
                return Err(Error::Shape(format!("{} proposal rows for {} variables", dists.len(), vars.len())));
            }
            let mut out = Vec::new();
            for (i, (d, v)) in dists.iter().zip(vars).enumerate() {
                if evidence.contains_key(v.name()) {
                    out.push(Vec::new());
                    continue;
                }
                if d.len() != v.cardinality() || d.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return Err(Error::Argument(format!("proposal for `{}` is not a distribution", v.name())));
                }
                let s: f64 = d.iter().sum();
                if !(s > 0.0) {
                    return Err(Error::Argument(format!("proposal for `{}` is all zero", v.name())));
                }
                for (k, &p) in d.iter().enumerate() {
                    if p == 0.0 {
                        let mut e = evidence.clone();
                        e.insert(vars[i].name().to_string(), k);
                        match variable_elimination(model, &[], &e, Semiring::SumProduct, None) {
                            Err(Error::ZeroEvidence) => {}
                            Err(err) => return Err(err),
                            Ok(_) => return Err(Error::InfiniteWeight),
                        }
                    }
                }
                out.push(d.iter().map(|p| p / s).collect());
            }
            Ok(Prepared::Factored(out))
        }
        Proposal::Joint(f) => {
            let names = f.names();
            if names.len() != hidden.len() || hidden.iter().any(|&i| !names.contains(&vars[i].name())) {
                return Err(Error::Scope("joint proposal must cover exactly the hidden variables".into()));
            }
            let positions: Vec<usize> = names.iter().map(|n| model.variable_index(n)).collect::<Result<_>>()?;
            let total = f.total();
            if !(total > 0.0) {
                return Err(Error::Argument("joint proposal is all zero".into()));
            }
            let table: Vec<f64> = f.values().iter().map(|p| p / total).collect();
            let mut x = vec![0; vars.len()];
            for (k, v) in evidence {
                x[model.variable_index(k)?] = *v;
            }
            for (idx, &p) in table.iter().enumerate() {
                if p == 0.0 {
                    for (&pos, s) in positions.iter().zip(f.states_of(idx)) {
                        x[pos] = s;
                    }
                    if log_joint(model, &x)? > f64::NEG_INFINITY {
                        return Err(Error::InfiniteWeight);
                    }
                }
            }
            Ok(Prepared::Joint { table, positions, factor: f.clone() })
        }
    }
}

/// Importance sampling with weights `p̃(e, z) / q(z)`.
///
/// Unnormalized: the mean of `δ(z) w(z)`, where `δ` tests `target` (always 1
/// without a target); for a Bayesian network this is unbiased for
/// `p(evidence, target)`. Normalized: `Σ δ w / Σ w` on the same samples,
/// estimating `p(target | evidence)`.
pub fn importance_estimate<M: FactorModel + ?Sized>(
    model: &M,
    evidence: &Evidence,
    target: Option<&Evidence>,
    proposal: &Proposal,
    n: usize,
    rng: &mut RandomSource,
    normalized: bool,
) -> Result<ImportanceEstimate> {
    check_evidence(model, evidence)?;
    if let Some(t) = target {
        check_evidence(model, t)?;
    }
    if normalized && target.is_none() {
        return Err(Error::Argument("normalized importance sampling needs a target event".into()));
    }
    let prepared = prepare(model, evidence, proposal)?;
    let vars = model.variables();
    let mut base = vec![0; vars.len()];
    for (k, v) in evidence {
        base[model.variable_index(k)?] = *v;
    }
    let tgt: Vec<(usize, usize)> = target
        .map(|t| t.iter().map(|(k, &s)| (model.variable_index(k).expect("checked"), s)).collect())
        .unwrap_or_default();
    let mut samples = SampleBatch::new(vars.to_vec(), rng.seed());
    let mut weights = Vec::with_capacity(n);
    let (mut sum_w, mut sum_dw, mut sum_w2) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let mut x = base.clone();
        let q = match &prepared {
            Prepared::Uniform(hidden) => {
                let mut q = 1.0;
                for &i in hidden {
                    let k = vars[i].cardinality();
                    x[i] = rng.index(k);
                    q /= k as f64;
                }
                q
            }
            Prepared::Factored(d) => {
                let mut q = 1.0;
                for (i, di) in d.iter().enumerate() {
                    if !di.is_empty() {
                        x[i] = rng.categorical(di).expect("normalized");
                        q *= di[x[i]];
                    }
                }
                q
            }
            Prepared::Joint { table, positions, factor } => {
                let idx = rng.categorical(table).expect("normalized");
                for (&pos, s) in positions.iter().zip(factor.states_of(idx)) {
                    x[pos] = s;
                }
                table[idx]
            }
        };
        let w = log_joint(model, &x)?.exp() / q;
        let hit = tgt.iter().all(|&(i, s)| x[i] == s);
        sum_w += w;
        sum_w2 += w * w;
        if hit {
            sum_dw += w;
        }
        weights.push(w);
        samples.assignments.push(x);
    }
    samples.weights = Some(weights);
    let estimate = if normalized {
        if !(sum_w > 0.0) {
            return Err(Error::ZeroEvidence);
        }
        sum_dw / sum_w
    } else if n == 0 {
        0.0
    } else {
        sum_dw / n as f64
    };
    let effective_sample_size = if sum_w2 > 0.0 { sum_w * sum_w / sum_w2 } else { 0.0 };
    Ok(ImportanceEstimate { estimate, effective_sample_size, samples })
}
