use crate::error::{Error, Result};
use crate::factor::Evidence;
use crate::models::{check_evidence, FactorModel, MarkovRandomField};
use crate::Factor;

/// Message update order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Every variable-to-factor message from the previous round, then every
    /// factor-to-variable message from those.
    #[default]
    Synchronous,
    /// Factor by factor in model order, always using the latest messages.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopyOptions {
    pub max_iters: usize,
    /// `new = (1 − λ)·old + λ·proposed`; 1 means no damping.
    pub damping: f64,
    /// Converged once the largest message change in a round is below this.
    pub tol: f64,
    pub schedule: Schedule,
}

impl Default for LoopyOptions {
    fn default() -> Self {
        LoopyOptions { max_iters: 500, damping: 0.5, tol: 1e-10, schedule: Schedule::Synchronous }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopyResult {
    /// Approximate marginal of every model variable (point masses for evidence).
    pub marginals: Vec<Factor>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest message change in the last round.
    pub residual: f64,
}

impl LoopyResult {
    pub fn marginal(&self, name: &str) -> Result<&Factor> {
        self.marginals.iter().find(|f| f.names()[0] == name).ok_or_else(|| Error::Lookup(name.to_string()))
    }
}

struct Graph {
    cards: Vec<usize>,
    scopes: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
    /// `(factor, position in its scope)` for every variable.
    var_edges: Vec<Vec<(usize, usize)>>,
}

fn normalized(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ZeroEvidence);
    }
    for x in &mut v {
        *x /= s;
    }
    Ok(v)
}

fn blend(old: &mut [f64], new: &[f64], lambda: f64) -> f64 {
    let mut change: f64 = 0.0;
    for (o, &n) in old.iter_mut().zip(new) {
        let v = (1.0 - lambda) * *o + lambda * n;
        change = change.max((v - *o).abs());
        *o = v;
    }
    change
}

impl Graph {
    fn var_to_factor(&self, f2v: &[Vec<Vec<f64>>], f: usize, p: usize) -> Result<Vec<f64>> {
        let i = self.scopes[f][p];
        let mut m = vec![1.0; self.cards[i]];
        for &(g, q) in &self.var_edges[i] {
            if g != f {
                for (a, b) in m.iter_mut().zip(&f2v[g][q]) {
                    *a *= b;
                }
            }
        }
        normalized(m)
    }

    fn factor_to_var(&self, v2f: &[Vec<Vec<f64>>], f: usize, p: usize) -> Result<Vec<f64>> {
        let sc = &self.scopes[f];
        let mut m = vec![0.0; self.cards[sc[p]]];
        let mut states = vec![0usize; sc.len()];
        for &phi in &self.tables[f] {
            let mut w = phi;
            for (q, &s) in states.iter().enumerate() {
                if q != p {
                    w *= v2f[f][q][s];
                }
            }
            m[states[p]] += w;
            for q in (0..sc.len()).rev() {
                states[q] += 1;
                if states[q] < self.cards[sc[q]] {
                    break;
                }
                states[q] = 0;
            }
        }
        normalized(m)
    }
}

/// Loopy sum-product belief propagation on the factor graph of the
/// evidence-reduced model, starting from uniform messages.
pub fn loopy_bp<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence, opts: &LoopyOptions) -> Result<LoopyResult> {
    check_evidence(model, evidence)?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Argument("damping must lie in (0, 1]".into()));
    }
    let full = MarkovRandomField::new(model.variables().to_vec(), model.factors().to_vec())?;
    let reduced = full.reduced(evidence)?;
    let keep: Vec<usize> = reduced.factors().iter().enumerate().filter(|(_, f)| !f.scope().is_empty()).map(|(k, _)| k).collect();
    let all_scopes = reduced.scope_indices();
    let cards: Vec<usize> = reduced.variables().iter().map(|v| v.cardinality()).collect();
    let scopes: Vec<Vec<usize>> = keep.iter().map(|&k| all_scopes[k].clone()).collect();
    let tables: Vec<Vec<f64>> = keep.iter().map(|&k| reduced.factors()[k].values().to_vec()).collect();
    let mut var_edges = vec![Vec::new(); cards.len()];
    for (f, sc) in scopes.iter().enumerate() {
        for (p, &i) in sc.iter().enumerate() {
            var_edges[i].push((f, p));
        }
    }
    let g = Graph { cards, scopes, tables, var_edges };
    let uniform = |i: usize| vec![1.0 / g.cards[i] as f64; g.cards[i]];
    let mut v2f: Vec<Vec<Vec<f64>>> = g.scopes.iter().map(|sc| sc.iter().map(|&i| uniform(i)).collect()).collect();
    let mut f2v = v2f.clone();
    let lambda = opts.damping;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let mut change: f64 = 0.0;
        match opts.schedule {
            Schedule::Synchronous => {
                let mut next = v2f.clone();
                for f in 0..g.scopes.len() {
                    for p in 0..g.scopes[f].len() {
                        let m = g.var_to_factor(&f2v, f, p)?;
                        change = change.max(blend(&mut next[f][p], &m, lambda));
                    }
                }
                v2f = next;
                let mut next = f2v.clone();
                for f in 0..g.scopes.len() {
                    for p in 0..g.scopes[f].len() {
                        let m = g.factor_to_var(&v2f, f, p)?;
                        change = change.max(blend(&mut next[f][p], &m, lambda));
                    }
                }
                f2v = next;
            }
            Schedule::Sequential => {
                for f in 0..g.scopes.len() {
                    for p in 0..g.scopes[f].len() {
                        let m = g.var_to_factor(&f2v, f, p)?;
                        change = change.max(blend(&mut v2f[f][p], &m, lambda));
                    }
                    for p in 0..g.scopes[f].len() {
                        let m = g.factor_to_var(&v2f, f, p)?;
                        change = change.max(blend(&mut f2v[f][p], &m, lambda));
                    }
                }
            }
        }
        residual = change;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let mut marginals = Vec::new();
    let mut r = 0;
    for v in model.variables() {
        if let Some(&s) = evidence.get(v.name()) {
            let mut t = vec![0.0; v.cardinality()];
            t[s] = 1.0;
            marginals.push(Factor::new(vec![v.clone()], t)?);
            continue;
        }
        let mut b = vec![1.0; g.cards[r]];
        for &(f, p) in &g.var_edges[r] {
            for (a, m) in b.iter_mut().zip(&f2v[f][p]) {
                *a *= m;
            }
        }
        marginals.push(Factor::new(vec![v.clone()], normalized(b)?)?);
        r += 1;
    }
    Ok(LoopyResult { marginals, converged, iterations, residual })
}
