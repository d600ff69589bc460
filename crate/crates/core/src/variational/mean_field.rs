use std::io::Write;

use super::{elbo, FactoredDistribution};
use crate::error::{Error, Result};
use crate::exact::{choose_ordering, variable_elimination, Heuristic};
use crate::factor::{Evidence, Semiring};
use crate::models::{check_evidence, FactorModel, MarkovRandomField};
use crate::random::seeded;
use rand::Rng as _;

/// Mean-field settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldOptions {
    pub max_sweeps: usize,
    /// Stop once a sweep raises the ELBO by less than this.
    pub tol: f64,
    /// Starting point over the unobserved variables; uniform by default.
    pub init: Option<FactoredDistribution>,
    /// Extra runs from randomly perturbed starting points; the best ELBO wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        MeanFieldOptions { max_sweeps: 200, tol: 1e-10, init: None, restarts: 0, seed: 0 }
    }
}

/// ELBO after every coordinate update.
#[derive(Debug, Clone, PartialEq)]
pub struct ElboTrace {
    /// `(sweep, variable, elbo)`; the first entry is the starting point with sweep 0 and no variable.
    pub updates: Vec<(usize, Option<String>, f64)>,
    /// ELBO at the end of each sweep.
    pub sweeps: Vec<f64>,
    pub converged: bool,
    /// `log Z − ELBO`, when `log Z` can be computed exactly.
    pub kl_gap: Option<f64>,
}

impl ElboTrace {
    pub fn final_elbo(&self) -> f64 {
        self.updates.last().map_or(f64::NEG_INFINITY, |u| u.2)
    }

    /// Updates that lowered the ELBO by more than `tol`.
    pub fn violations(&self, tol: f64) -> usize {
        self.updates.windows(2).filter(|w| w[1].2 < w[0].2 - tol).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "sweep", "variable", "elbo"]).map_err(|e| Error::Io(e.to_string()))?;
        for (k, (s, v, e)) in self.updates.iter().enumerate() {
            w.write_record([k.to_string(), s.to_string(), v.clone().unwrap_or_default(), format!("{e:.16e}")])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

const EXACT_CAP: f64 = (1u64 << 22) as f64;

fn exact_log_z(model: &MarkovRandomField) -> Option<f64> {
    let o = choose_ordering(model, Heuristic::MinFill, &[]).ok()?;
    let max_card = model.variables().iter().map(|v| v.cardinality()).max().unwrap_or(1) as f64;
    if max_card.powi(o.induced_width as i32 + 1) > EXACT_CAP {
        return None;
    }
    variable_elimination(model, &[], &Evidence::new(), Semiring::SumProduct, Some(&o)).ok().map(|r| r.log_normalizer)
}

fn run(model: &MarkovRandomField, mut q: FactoredDistribution, opts: &MeanFieldOptions) -> Result<(FactoredDistribution, ElboTrace)> {
    let vars = model.variables().to_vec();
    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by(|&a, &b| vars[a].name().cmp(vars[b].name()));
    let factor_q: Vec<Vec<usize>> = model.scope_indices();
    let touching: Vec<Vec<usize>> =
        (0..vars.len()).map(|i| (0..factor_q.len()).filter(|&f| factor_q[f].contains(&i)).collect()).collect();
    let mut current = elbo(model, &q)?;
    let mut trace = ElboTrace { updates: vec![(0, None, current)], sweeps: Vec::new(), converged: false, kl_gap: None };
    for sweep in 1..=opts.max_sweeps {
        let start = current;
        for &j in &order {
            let k = vars[j].cardinality();
            let mut logs = vec![0.0; k];
            for &f in &touching[j] {
                let fac = &model.factors()[f];
                let pos = factor_q[f].iter().position(|&i| i == j).expect("touching");
                for (idx, &phi) in fac.values().iter().enumerate() {
                    let states = fac.states_of(idx);
                    let w: f64 = factor_q[f]
                        .iter()
                        .zip(&states)
                        .enumerate()
                        .filter(|(p, _)| *p != pos)
                        .map(|(_, (&i, &s))| q.tables()[i][s])
                        .product();
                    if w > 0.0 {
                        logs[states[pos]] += w * phi.ln();
                    }
                }
            }
            let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY || m.is_nan() {
                return Err(Error::Degenerate(format!("mean-field update for `{}` has zero mass", vars[j].name())));
            }
            let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = w.iter().sum();
            q.set(j, w.into_iter().map(|x| x / z).collect());
            current = elbo(model, &q)?;
            trace.updates.push((sweep, Some(vars[j].name().to_string()), current));
        }
        trace.sweeps.push(current);
        if current - start < opts.tol {
            trace.converged = true;
            break;
        }
    }
    Ok((q, trace))
}

/// Coordinate-ascent mean field on the evidence-reduced model.
///
/// Each update sets `log q_j(x_j) = Σ_c E_{q_{−j}}[log φ_c] + const` over
/// the factors touching `j`, visiting variables in name order.
pub fn mean_field<M: FactorModel + ?Sized>(
    model: &M,
    evidence: &Evidence,
    opts: &MeanFieldOptions,
) -> Result<(FactoredDistribution, ElboTrace)> {
    check_evidence(model, evidence)?;
    let full = MarkovRandomField::new(model.variables().to_vec(), model.factors().to_vec())?;
    let reduced = full.reduced(evidence)?;
    let vars = reduced.variables().to_vec();
    let init = match &opts.init {
        Some(q) => {
            if q.variables().len() != vars.len() || q.variables().iter().zip(&vars).any(|(a, b)| a.name() != b.name()) {
                return Err(Error::Scope("initial q must cover the unobserved variables in model order".into()));
            }
            q.clone()
        }
        None => FactoredDistribution::uniform(vars.clone()),
    };
    let mut best = run(&reduced, init, opts)?;
    let mut rng = seeded(opts.seed);
    for _ in 0..opts.restarts {
        let tables: Vec<Vec<f64>> = vars
            .iter()
            .map(|v| {
                let w: Vec<f64> = (0..v.cardinality()).map(|_| 0.05 + rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let start = FactoredDistribution::new(vars.clone(), tables)?;
        let cand = run(&reduced, start, opts)?;
        if cand.1.final_elbo() > best.1.final_elbo() {
            best = cand;
        }
    }
    if let Some(lz) = exact_log_z(&reduced) {
        best.1.kl_gap = Some(lz - best.1.final_elbo());
    }
    Ok(best)
}
