use super::pairwise::PairwiseForm;
use crate::error::{Error, Result};
use crate::models::FactorModel;

/// Settings for subgradient dual decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    /// Step size at iteration k is `step / sqrt(k)`.
    pub step: f64,
    pub max_iters: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { step: 1.0, max_iters: 1000 }
    }
}

/// Multipliers and local solutions at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    /// `delta[e][0]` is `δ_{e,i}` and `delta[e][1]` is `δ_{e,j}` for edge `e = (i, j)`.
    pub delta: Vec<[Vec<f64>; 2]>,
    /// Edges as variable index pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub bound: f64,
    pub node_argmax: Vec<usize>,
    pub edge_argmax: Vec<(usize, usize)>,
    pub agreement: bool,
}

/// Outcome of [`dual_decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    /// State at the last evaluated iterate.
    pub state: DualState,
    /// `L(δ_k)` for every evaluated iterate.
    pub bounds: Vec<f64>,
    /// Agreeing assignment, or the best node-argmax assignment seen.
    pub assignment: Vec<usize>,
    /// Log-score of `assignment`.
    pub log_joint: f64,
    pub iterations: usize,
}

impl DualResult {
    /// Smallest bound minus the decoded score; zero certifies optimality.
    pub fn gap(&self) -> f64 {
        self.bounds.iter().copied().fold(f64::INFINITY, f64::min) - self.log_joint
    }
}

fn argmax(xs: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, x) in xs.enumerate() {
        if k == 0 || x > best.1 {
            best = (k, x);
        }
    }
    best
}

fn evaluate(form: &PairwiseForm, delta: &[[Vec<f64>; 2]]) -> DualState {
    let n = form.cards.len();
    let mut bar: Vec<Vec<f64>> = form.unary.clone();
    for ((i, j, _), d) in form.edges.iter().zip(delta) {
        for (b, x) in bar[*i].iter_mut().zip(&d[0]) {
            *b += x;
        }
        for (b, x) in bar[*j].iter_mut().zip(&d[1]) {
            *b += x;
        }
    }
    let mut bound = form.constant;
    let mut node_argmax = Vec::with_capacity(n);
    for b in &bar {
        let (k, v) = argmax(b.iter().copied());
        node_argmax.push(k);
        bound += v;
    }
    let mut edge_argmax = Vec::with_capacity(form.edges.len());
    for ((_, j, t), d) in form.edges.iter().zip(delta) {
        let kj = form.cards[*j];
        let (k, v) = argmax(t.iter().enumerate().map(|(k, &th)| th - d[0][k / kj] - d[1][k % kj]));
        edge_argmax.push((k / kj, k % kj));
        bound += v;
    }
    let agreement = form
        .edges
        .iter()
        .zip(&edge_argmax)
        .all(|((i, j, _), &(a, b))| node_argmax[*i] == a && node_argmax[*j] == b);
    DualState {
        delta: delta.to_vec(),
        edges: form.edges.iter().map(|e| (e.0, e.1)).collect(),
        bound,
        node_argmax,
        edge_argmax,
        agreement,
    }
}

/// MAP by subgradient descent on the Lagrangian dual with one subproblem per
/// variable and one per connected pair.
///
/// The variable subproblems maximize `θ_i + Σ_e δ_{e,i}` and the pair
/// subproblems maximize `θ_e − δ_{e,i} − δ_{e,j}`, so the summed maxima
/// bound the MAP log-score from above. Stops at the first agreeing iterate.
pub fn dual_decomposition<M: FactorModel + ?Sized>(model: &M, opts: &DualOptions) -> Result<DualResult> {
    if !(opts.step > 0.0) {
        return Err(Error::Argument("step must be positive".into()));
    }
    let form = PairwiseForm::from_model(model)?;
    let mut delta: Vec<[Vec<f64>; 2]> =
        form.edges.iter().map(|(i, j, _)| [vec![0.0; form.cards[*i]], vec![0.0; form.cards[*j]]]).collect();
    let mut bounds = Vec::new();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut k = 0;
    loop {
        let state = evaluate(&form, &delta);
        bounds.push(state.bound);
        let score = form.score(&state.node_argmax);
        if best.as_ref().is_none_or(|b| score > b.1) {
            best = Some((state.node_argmax.clone(), score));
        }
        if state.agreement || k >= opts.max_iters {
            let (assignment, log_joint) = if state.agreement {
                (state.node_argmax.clone(), score)
            } else {
                best.expect("at least one iterate")
            };
            return Ok(DualResult { state, bounds, assignment, log_joint, iterations: k });
        }
        k += 1;
        let alpha = opts.step / (k as f64).sqrt();
        for (e, (i, j, _)) in form.edges.iter().enumerate() {
            let (a, b) = state.edge_argmax[e];
            if state.node_argmax[*i] != a {
                delta[e][0][state.node_argmax[*i]] -= alpha;
                delta[e][0][a] += alpha;
            }
            if state.node_argmax[*j] != b {
                delta[e][1][state.node_argmax[*j]] -= alpha;
                delta[e][1][b] += alpha;
            }
        }
    }
}
