use super::{forward_sample, RandomSource, SampleBatch};
use crate::error::{Error, Result};
use crate::factor::Evidence;
use crate::models::{check_evidence, FactorModel};
use crate::Factor;

/// Log factor tables indexed for local rescoring.
#[derive(Debug, Clone)]
pub(crate) struct Local {
    pub cards: Vec<usize>,
    tables: Vec<Vec<f64>>,
    scopes: Vec<Vec<(usize, usize)>>,
    touching: Vec<Vec<usize>>,
}

impl Local {
    pub fn new<M: FactorModel + ?Sized>(model: &M) -> Local {
        let cards: Vec<usize> = model.variables().iter().map(|v| v.cardinality()).collect();
        let mut touching = vec![Vec::new(); cards.len()];
        let mut tables = Vec::new();
        let mut scopes = Vec::new();
        for (k, (f, sc)) in model.factors().iter().zip(model.scope_indices()).enumerate() {
            tables.push(f.values().iter().map(|p| p.ln()).collect());
            scopes.push(sc.iter().copied().zip(f.strides()).collect());
            for &i in &sc {
                touching[i].push(k);
            }
        }
        Local { cards, tables, scopes, touching }
    }

    fn factor(&self, k: usize, x: &[usize]) -> f64 {
        self.tables[k][self.scopes[k].iter().map(|&(i, s)| x[i] * s).sum::<usize>()]
    }

    pub fn log_score(&self, x: &[usize]) -> f64 {
        (0..self.tables.len()).map(|k| self.factor(k, x)).sum()
    }

    /// `p(x_i | x_{-i})` from the factors touching `i`; `None` if every state has zero mass.
    pub fn conditional(&self, i: usize, x: &[usize]) -> Option<Vec<f64>> {
        let mut y = x.to_vec();
        let logs: Vec<f64> = (0..self.cards[i])
            .map(|s| {
                y[i] = s;
                self.touching[i].iter().map(|&k| self.factor(k, &y)).sum()
            })
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY || m.is_nan() {
            return None;
        }
        let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let z: f64 = w.iter().sum();
        Some(w.into_iter().map(|v| v / z).collect())
    }
}

fn trapped(model: &(impl FactorModel + ?Sized), i: usize) -> Error {
    Error::TrappedState(model.variables()[i].name().to_string())
}

/// `p(x_i | x_{-i})` at a full assignment `x` in model variable order.
pub fn full_conditional<M: FactorModel + ?Sized>(model: &M, variable: &str, x: &[usize]) -> Result<Vec<f64>> {
    let i = model.variable_index(variable)?;
    let local = Local::new(model);
    if x.len() != local.cards.len() || x.iter().zip(&local.cards).any(|(&s, &k)| s >= k) {
        return Err(Error::Argument("assignment does not fit the model".into()));
    }
    local.conditional(i, x).ok_or_else(|| trapped(model, i))
}

/// Variables not fixed by evidence, in model order.
fn free_variables<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Vec<usize> {
    model.variables().iter().enumerate().filter(|(_, v)| !evidence.contains_key(v.name())).map(|(i, _)| i).collect()
}

/// Starting point: a forward sample for Bayesian networks, otherwise uniform;
/// evidence is clamped either way.
fn initial_state<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence, rng: &mut RandomSource) -> Result<Vec<usize>> {
    let mut x = match model.bayesian() {
        Some(bn) => forward_sample(bn, 1, rng)?.assignments.pop().expect("one sample"),
        None => model.variables().iter().map(|v| rng.index(v.cardinality())).collect(),
    };
    for (k, &s) in evidence {
        x[model.variable_index(k)?] = s;
    }
    Ok(x)
}

/// Gibbs sampler settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GibbsOptions {
    /// Update a uniformly chosen variable per step instead of sweeping in order.
    pub random_scan: bool,
    /// Explicit starting assignment (evidence entries are overwritten).
    pub init: Option<Vec<usize>>,
}

/// Systematic-scan Gibbs sampling: `burn_in` discarded sweeps, then one
/// sample per sweep.
pub fn gibbs<M: FactorModel + ?Sized>(
    model: &M,
    evidence: &Evidence,
    n: usize,
    burn_in: usize,
    rng: &mut RandomSource,
) -> Result<SampleBatch> {
    gibbs_with(model, evidence, n, burn_in, rng, &GibbsOptions::default())
}

pub fn gibbs_with<M: FactorModel + ?Sized>(
    model: &M,
    evidence: &Evidence,
    n: usize,
    burn_in: usize,
    rng: &mut RandomSource,
    opts: &GibbsOptions,
) -> Result<SampleBatch> {
    check_evidence(model, evidence)?;
    let local = Local::new(model);
    let mut order = free_variables(model, evidence);
    order.sort_by(|&a, &b| model.variables()[a].name().cmp(model.variables()[b].name()));
    let mut x = match &opts.init {
        Some(init) => {
            if init.len() != local.cards.len() || init.iter().zip(&local.cards).any(|(&s, &k)| s >= k) {
                return Err(Error::Argument("initial assignment does not fit the model".into()));
            }
            let mut x = init.clone();
            for (k, &s) in evidence {
                x[model.variable_index(k)?] = s;
            }
            x
        }
        None => initial_state(model, evidence, rng)?,
    };
    let mut batch = SampleBatch::new(model.variables().to_vec(), rng.seed());
    batch.burn_in = burn_in;
    for sweep in 0..burn_in + n {
        for step in 0..order.len() {
            let i = if opts.random_scan { order[rng.index(order.len())] } else { order[step] };
            let p = local.conditional(i, &x).ok_or_else(|| trapped(model, i))?;
            x[i] = rng.categorical(&p).expect("normalized");
        }
        if sweep >= burn_in {
            batch.assignments.push(x.clone());
        }
    }
    Ok(batch)
}

/// A Metropolis-Hastings proposal `Q(x' | x)`.
pub trait ProposalKernel {
    fn propose(&self, x: &[usize], rng: &mut RandomSource) -> Vec<usize>;

    /// `Q(to | from)`.
    fn density(&self, from: &[usize], to: &[usize]) -> f64;
}

fn differing(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).enumerate().filter(|(_, (x, y))| x != y).map(|(i, _)| i).collect()
}

/// Change one uniformly chosen free variable to a uniformly chosen other state.
#[derive(Debug, Clone)]
pub struct SingleFlipUniform {
    cards: Vec<usize>,
    movable: Vec<usize>,
}

impl SingleFlipUniform {
    pub fn new<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Self {
        let cards: Vec<usize> = model.variables().iter().map(|v| v.cardinality()).collect();
        let movable = free_variables(model, evidence).into_iter().filter(|&i| cards[i] > 1).collect();
        SingleFlipUniform { cards, movable }
    }
}

impl ProposalKernel for SingleFlipUniform {
    fn propose(&self, x: &[usize], rng: &mut RandomSource) -> Vec<usize> {
        let mut y = x.to_vec();
        if self.movable.is_empty() {
            return y;
        }
        let i = self.movable[rng.index(self.movable.len())];
        let mut s = rng.index(self.cards[i] - 1);
        if s >= x[i] {
            s += 1;
        }
        y[i] = s;
        y
    }

    fn density(&self, from: &[usize], to: &[usize]) -> f64 {
        match differing(from, to).as_slice() {
            [] if self.movable.is_empty() => 1.0,
            [i] if self.movable.contains(i) => 1.0 / (self.movable.len() as f64 * (self.cards[*i] - 1) as f64),
            _ => 0.0,
        }
    }
}

/// Pick a free variable uniformly and redraw it from its full conditional.
#[derive(Debug, Clone)]
pub struct GibbsSiteKernel {
    local: Local,
    movable: Vec<usize>,
}

impl GibbsSiteKernel {
    pub fn new<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Self {
        GibbsSiteKernel { local: Local::new(model), movable: free_variables(model, evidence) }
    }
}

impl ProposalKernel for GibbsSiteKernel {
    fn propose(&self, x: &[usize], rng: &mut RandomSource) -> Vec<usize> {
        let mut y = x.to_vec();
        if self.movable.is_empty() {
            return y;
        }
        let i = self.movable[rng.index(self.movable.len())];
        if let Some(p) = self.local.conditional(i, x) {
            y[i] = rng.categorical(&p).expect("normalized");
        }
        y
    }

    fn density(&self, from: &[usize], to: &[usize]) -> f64 {
        if self.movable.is_empty() {
            return if from == to { 1.0 } else { 0.0 };
        }
        let m = self.movable.len() as f64;
        let cond = |i: usize| self.local.conditional(i, from);
        match differing(from, to).as_slice() {
            [] => self
                .movable
                .iter()
                .map(|&i| cond(i).map_or(1.0, |p| p[from[i]]))
                .sum::<f64>()
                / m,
            [i] if self.movable.contains(i) => cond(*i).map_or(0.0, |p| p[to[*i]]) / m,
            _ => 0.0,
        }
    }
}

/// Proposal independent of the current state, from a table over all variables.
#[derive(Debug, Clone)]
pub struct IndependentKernel {
    cards: Vec<usize>,
    table: Vec<f64>,
}

impl IndependentKernel {
    /// `joint` must cover every model variable; it is normalized here.
    pub fn new<M: FactorModel + ?Sized>(model: &M, joint: &Factor) -> Result<Self> {
        let names = model.variable_names();
        if joint.scope().len() != names.len() {
            return Err(Error::Scope("independent proposal must cover every variable".into()));
        }
        let f = joint.permute(&names)?;
        let z = f.total();
        if !(z > 0.0) {
            return Err(Error::Argument("independent proposal is all zero".into()));
        }
        Ok(IndependentKernel { cards: f.cardinalities(), table: f.values().iter().map(|p| p / z).collect() })
    }

    fn index(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.cards).fold(0, |acc, (&s, &k)| acc * k + s)
    }
}

impl ProposalKernel for IndependentKernel {
    fn propose(&self, _x: &[usize], rng: &mut RandomSource) -> Vec<usize> {
        let mut idx = rng.categorical(&self.table).expect("normalized");
        let mut y = vec![0; self.cards.len()];
        for (slot, &k) in y.iter_mut().zip(&self.cards).rev() {
            *slot = idx % k;
            idx /= k;
        }
        y
    }

    fn density(&self, _from: &[usize], to: &[usize]) -> f64 {
        self.table[self.index(to)]
    }
}

/// Metropolis-Hastings with acceptance `min(1, p̃(x')Q(x|x') / (p̃(x)Q(x'|x)))`.
///
/// Records one sample per proposal after `burn_in` proposals; rejected moves
/// repeat the current state. Proposals that change an observed variable are
/// rejected.
pub fn metropolis_hastings<M: FactorModel + ?Sized>(
    model: &M,
    kernel: &dyn ProposalKernel,
    evidence: &Evidence,
    n: usize,
    burn_in: usize,
    rng: &mut RandomSource,
) -> Result<SampleBatch> {
    check_evidence(model, evidence)?;
    let local = Local::new(model);
    let fixed: Vec<(usize, usize)> =
        evidence.iter().map(|(k, &s)| (model.variable_index(k).expect("checked"), s)).collect();
    let mut x = initial_state(model, evidence, rng)?;
    let mut cur = local.log_score(&x);
    let mut batch = SampleBatch::new(model.variables().to_vec(), rng.seed());
    batch.burn_in = burn_in;
    let mut accepted = 0usize;
    for step in 0..burn_in + n {
        let y = kernel.propose(&x, rng);
        let ok = fixed.iter().all(|&(i, s)| y[i] == s);
        let new = if ok { local.log_score(&y) } else { f64::NEG_INFINITY };
        let accept = if new == f64::NEG_INFINITY {
            false
        } else {
            let back = kernel.density(&y, &x);
            let fwd = kernel.density(&x, &y);
            if !(back > 0.0) {
                return Err(Error::InvalidKernel("reverse proposal density is zero".into()));
            }
            let log_a = new - cur + back.ln() - fwd.ln();
            log_a >= 0.0 || rng.uniform() < log_a.exp()
        };
        if accept {
            x = y;
            cur = new;
        }
        if step >= burn_in {
            accepted += usize::from(accept);
            batch.assignments.push(x.clone());
        }
    }
    batch.acceptance_rate = (n > 0).then(|| accepted as f64 / n as f64);
    Ok(batch)
}

/// Occupancy of a few reference states along a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingDiagnostic {
    /// Fraction of mode visits spent in each mode.
    pub occupancy: Vec<f64>,
    /// Transitions between distinct modes along the trace.
    pub switches: usize,
    /// Largest gap between observed and expected occupancy.
    pub max_imbalance: f64,
    pub slow_mixing: bool,
}

/// Compare how often a chain visits `modes` with the `expected` proportions.
pub fn mixing_diagnostic(batch: &SampleBatch, modes: &[Vec<usize>], expected: &[f64], tolerance: f64) -> Result<MixingDiagnostic> {
    if modes.len() != expected.len() || modes.is_empty() {
        return Err(Error::Argument("one expected proportion per mode is required".into()));
    }
    let mut counts = vec![0usize; modes.len()];
    let mut last = None;
    let mut switches = 0;
    for x in &batch.assignments {
        if let Some(k) = modes.iter().position(|m| m == x) {
            counts[k] += 1;
            if last.is_some_and(|l| l != k) {
                switches += 1;
            }
            last = Some(k);
        }
    }
    let visits: usize = counts.iter().sum();
    let total_expected: f64 = expected.iter().sum();
    let occupancy: Vec<f64> =
        counts.iter().map(|&c| if visits == 0 { 0.0 } else { c as f64 / visits as f64 }).collect();
    let max_imbalance = occupancy
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e / total_expected).abs())
        .fold(0.0, f64::max);
    Ok(MixingDiagnostic { occupancy, switches, max_imbalance, slow_mixing: visits == 0 || max_imbalance > tolerance })
}
