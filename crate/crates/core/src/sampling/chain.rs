use std::collections::VecDeque;

use super::mcmc::{Local, ProposalKernel};
use crate::error::{Error, Result};
use crate::models::FactorModel;

/// Column-stochastic matrix: `get(i, j) = P(next = i | prev = j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    d: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// From rows `rows[i][j] = P(next = i | prev = j)`; every column must sum to 1 within 1e-12.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("transition matrix must be square and non-empty".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let t = TransitionMatrix { d, data };
        t.check()?;
        Ok(t)
    }

    /// From 1-based arcs `(from, to, probability)` over `d` states.
    pub fn from_arcs(d: usize, arcs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![vec![0.0; d]; d];
        for &(from, to, p) in arcs {
            if from == 0 || to == 0 || from > d || to > d {
                return Err(Error::Argument(format!("arc {from} -> {to} outside 1..={d}")));
            }
            rows[to - 1][from - 1] += p;
        }
        TransitionMatrix::new(rows)
    }

    fn check(&self) -> Result<()> {
        for j in 0..self.d {
            let mut s = 0.0;
            for i in 0..self.d {
                let v = self.get(i, j);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Argument(format!("entry ({i}, {j}) = {v} is not a probability")));
                }
                s += v;
            }
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::Argument(format!("column {j} sums to {s}, expected 1")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    /// `T p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.d).map(|i| (0..self.d).map(|j| self.get(i, j) * p[j]).sum()).collect()
    }

    /// `max_i |(T p)_i − p_i|`.
    pub fn stationarity_residual(&self, p: &[f64]) -> f64 {
        self.apply(p).iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max_{i,j} |π_j T_ij − π_i T_ji|`.
    pub fn detailed_balance_residual(&self, p: &[f64]) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                r = r.max((p[j] * self.get(i, j) - p[i] * self.get(j, i)).abs());
            }
        }
        r
    }

    fn successors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.d).filter(move |&i| self.get(i, j) > 0.0)
    }
}

/// Stationary distribution and structural properties of a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDiagnostics {
    pub stationary: Vec<f64>,
    pub iterations: usize,
    /// Whether plain power iteration met the tolerance; otherwise `stationary`
    /// is the running (Cesàro) average of the iterates.
    pub converged: bool,
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of each state; `None` when the state cannot return to itself.
    pub periods: Vec<Option<usize>>,
    pub detailed_balance_residual: f64,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 1_000_000;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn reach(t: &TransitionMatrix, start: usize, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; t.d];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        for v in 0..t.d {
            let edge = if forward { t.get(v, u) > 0.0 } else { t.get(u, v) > 0.0 };
            if edge && !seen[v] {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    seen
}

/// Period of every state: gcd of `level(u) + 1 − level(v)` over arcs inside
/// its strongly connected component.
fn periods(t: &TransitionMatrix) -> Vec<Option<usize>> {
    let mut out = vec![None; t.d];
    for s in 0..t.d {
        let fwd = reach(t, s, true);
        let bwd = reach(t, s, false);
        let comp: Vec<bool> = (0..t.d).map(|v| fwd[v] && bwd[v]).collect();
        let mut level = vec![usize::MAX; t.d];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        let mut g = 0;
        while let Some(u) = q.pop_front() {
            for v in t.successors(u) {
                if !comp[v] {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                } else {
                    g = gcd(g, (level[u] + 1).abs_diff(level[v]));
                }
            }
        }
        if g > 0 {
            out[s] = Some(g);
        }
    }
    out
}

/// Power iteration from `p0` (uniform by default) plus irreducibility,
/// aperiodicity and detailed-balance checks.
pub fn chain_analysis(t: &TransitionMatrix, p0: Option<&[f64]>) -> Result<ChainDiagnostics> {
    t.check()?;
    let d = t.d;
    let mut p: Vec<f64> = match p0 {
        Some(p0) => {
            let s: f64 = p0.iter().sum();
            if p0.len() != d || p0.iter().any(|x| !(*x >= 0.0)) || !(s > 0.0) {
                return Err(Error::Argument("initial distribution must be nonnegative with positive mass".into()));
            }
            p0.iter().map(|x| x / s).collect()
        }
        None => vec![1.0 / d as f64; d],
    };
    let mut avg = p.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < POWER_MAX_ITERS {
        let next = t.apply(&p);
        iterations += 1;
        let delta = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        let w = 1.0 / (iterations + 1) as f64;
        for (a, x) in avg.iter_mut().zip(&p) {
            *a += w * (x - *a);
        }
        if delta <= POWER_TOL {
            converged = true;
            break;
        }
    }
    let stationary = if converged { p } else { avg };
    let irreducible = reach(t, 0, true).iter().all(|&b| b) && reach(t, 0, false).iter().all(|&b| b);
    let periods = periods(t);
    let aperiodic = periods.iter().all(|p| *p == Some(1));
    let detailed_balance_residual = t.detailed_balance_residual(&stationary);
    Ok(ChainDiagnostics { stationary, iterations, converged, irreducible, aperiodic, periods, detailed_balance_residual })
}

const STATE_CAP: usize = 1 << 12;

fn all_states<M: FactorModel + ?Sized>(model: &M) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let cards: Vec<usize> = model.variables().iter().map(|v| v.cardinality()).collect();
    let size = cards.iter().try_fold(1usize, |a, &k| a.checked_mul(k)).unwrap_or(usize::MAX);
    if size > STATE_CAP {
        return Err(Error::TooLarge { size, cap: STATE_CAP });
    }
    let states = (0..size)
        .map(|mut idx| {
            let mut x = vec![0; cards.len()];
            for (slot, &k) in x.iter_mut().zip(&cards).rev() {
                *slot = idx % k;
                idx /= k;
            }
            x
        })
        .collect();
    Ok((cards, states))
}

fn index(cards: &[usize], x: &[usize]) -> usize {
    x.iter().zip(cards).fold(0, |acc, (&s, &k)| acc * k + s)
}

/// Exact transition matrix of one systematic Gibbs sweep (name order) over all
/// joint states in lexicographic model order.
pub fn gibbs_transition_matrix<M: FactorModel + ?Sized>(model: &M) -> Result<TransitionMatrix> {
    let (cards, states) = all_states(model)?;
    let local = Local::new(model);
    let d = states.len();
    let mut order: Vec<usize> = (0..cards.len()).collect();
    order.sort_by(|&a, &b| model.variables()[a].name().cmp(model.variables()[b].name()));
    let mut rows = vec![vec![0.0; d]; d];
    for (j, x0) in states.iter().enumerate() {
        let mut dist = vec![(x0.clone(), 1.0)];
        for &i in &order {
            let mut next = Vec::new();
            for (x, p) in dist {
                let c = local.conditional(i, &x).ok_or_else(|| Error::TrappedState(model.variables()[i].name().into()))?;
                for (s, q) in c.into_iter().enumerate() {
                    if q > 0.0 {
                        let mut y = x.clone();
                        y[i] = s;
                        next.push((y, p * q));
                    }
                }
            }
            dist = next;
        }
        for (x, p) in dist {
            rows[index(&cards, &x)][j] += p;
        }
    }
    normalize_columns(&mut rows);
    TransitionMatrix::new(rows)
}

/// Exact one-step Metropolis-Hastings transition matrix for `kernel`.
pub fn mh_transition_matrix<M: FactorModel + ?Sized>(model: &M, kernel: &dyn ProposalKernel) -> Result<TransitionMatrix> {
    let (_, states) = all_states(model)?;
    let local = Local::new(model);
    let d = states.len();
    let scores: Vec<f64> = states.iter().map(|x| local.log_score(x)).collect();
    let mut rows = vec![vec![0.0; d]; d];
    for j in 0..d {
        let mut moved = 0.0;
        for i in 0..d {
            if i == j {
                continue;
            }
            let q = kernel.density(&states[j], &states[i]);
            if q == 0.0 || scores[i] == f64::NEG_INFINITY {
                continue;
            }
            let back = kernel.density(&states[i], &states[j]);
            if !(back > 0.0) {
                return Err(Error::InvalidKernel("reverse proposal density is zero".into()));
            }
            let a = (scores[i] - scores[j] + back.ln() - q.ln()).exp().min(1.0);
            rows[i][j] = q * a;
            moved += q * a;
        }
        rows[j][j] = 1.0 - moved;
    }
    normalize_columns(&mut rows);
    TransitionMatrix::new(rows)
}

/// Remove rounding drift so columns sum to one.
fn normalize_columns(rows: &mut [Vec<f64>]) {
    let d = rows.len();
    for j in 0..d {
        let s: f64 = (0..d).map(|i| rows[i][j]).sum();
        if s > 0.0 {
            for row in rows.iter_mut() {
                row[j] /= s;
            }
        }
    }
}
