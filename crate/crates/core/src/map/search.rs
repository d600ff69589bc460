use rand::Rng as _;

use crate::error::{Error, Result};
use crate::models::FactorModel;
use crate::random::{seeded, Rng};

/// Log factor tables with strides for fast local rescoring.
struct Scorer {
    cards: Vec<usize>,
    tables: Vec<Vec<f64>>,
    scopes: Vec<Vec<(usize, usize)>>,
    touching: Vec<Vec<usize>>,
}

impl Scorer {
    fn new<M: FactorModel + ?Sized>(model: &M) -> Scorer {
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
        Scorer { cards, tables, scopes, touching }
    }

    fn factor(&self, k: usize, x: &[usize]) -> f64 {
        self.tables[k][self.scopes[k].iter().map(|&(i, s)| x[i] * s).sum::<usize>()]
    }

    fn total(&self, x: &[usize]) -> f64 {
        (0..self.tables.len()).map(|k| self.factor(k, x)).sum()
    }

    fn local(&self, i: usize, x: &[usize]) -> f64 {
        self.touching[i].iter().map(|&k| self.factor(k, x)).sum()
    }

    fn random_state(&self, rng: &mut Rng) -> Vec<usize> {
        self.cards.iter().map(|&k| rng.gen_range(0..k)).collect()
    }
}

fn greater(a: f64, b: f64) -> bool {
    a > b || (b.is_nan() && !a.is_nan())
}

/// Coordinate ascent from `start`: each variable moves to its best state when
/// that strictly raises the log-score, until a sweep changes nothing.
pub fn local_search_from<M: FactorModel + ?Sized>(
    model: &M,
    start: &[usize],
    max_sweeps: usize,
) -> Result<(Vec<usize>, f64)> {
    let sc = Scorer::new(model);
    if start.len() != sc.cards.len() || start.iter().zip(&sc.cards).any(|(&s, &k)| s >= k) {
        return Err(Error::Argument("start assignment does not fit the model".into()));
    }
    let mut x = start.to_vec();
    for _ in 0..max_sweeps {
        let mut changed = false;
        for i in 0..x.len() {
            let cur = x[i];
            let here = sc.local(i, &x);
            let mut best = (cur, here);
            for s in 0..sc.cards[i] {
                x[i] = s;
                let v = sc.local(i, &x);
                if greater(v, best.1) {
                    best = (s, v);
                }
            }
            x[i] = best.0;
            changed |= best.0 != cur;
        }
        if !changed {
            break;
        }
    }
    let lj = sc.total(&x);
    Ok((x, lj))
}

/// Local search from a uniformly random start drawn with `seed`.
pub fn local_search_map<M: FactorModel + ?Sized>(model: &M, seed: u64, max_sweeps: usize) -> Result<(Vec<usize>, f64)> {
    let sc = Scorer::new(model);
    let start = sc.random_state(&mut seeded(seed));
    local_search_from(model, &start, max_sweeps)
}

/// Geometric cooling: `t_k = t0 · cooling^k` for `k < levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule {
    pub t0: f64,
    pub cooling: f64,
    pub levels: usize,
    /// Metropolis proposals per temperature level.
    pub steps_per_level: usize,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        AnnealingSchedule { t0: 5.0, cooling: 0.95, levels: 150, steps_per_level: 100 }
    }
}

/// Simulated annealing with single-variable Metropolis moves on `p^(1/t)`.
///
/// Returns the best assignment seen and its log-score.
pub fn simulated_annealing_map<M: FactorModel + ?Sized>(
    model: &M,
    schedule: &AnnealingSchedule,
    seed: u64,
) -> Result<(Vec<usize>, f64)> {
    if !(schedule.t0 > 0.0) || !(schedule.cooling > 0.0 && schedule.cooling <= 1.0) {
        return Err(Error::Argument("temperature must be positive and cooling in (0, 1]".into()));
    }
    let sc = Scorer::new(model);
    let mut rng = seeded(seed);
    let mut x = sc.random_state(&mut rng);
    let mut cur = sc.total(&x);
    let mut best = (x.clone(), cur);
    let movable: Vec<usize> = (0..x.len()).filter(|&i| sc.cards[i] > 1).collect();
    if movable.is_empty() {
        return Ok(best);
    }
    let mut t = schedule.t0;
    for _ in 0..schedule.levels {
        for _ in 0..schedule.steps_per_level {
            let i = movable[rng.gen_range(0..movable.len())];
            let old = x[i];
            let mut s = rng.gen_range(0..sc.cards[i] - 1);
            if s >= old {
                s += 1;
            }
            let before = sc.local(i, &x);
            x[i] = s;
            let after = sc.local(i, &x);
            let diff = after - before;
            let accept = if cur == f64::NEG_INFINITY {
                true
            } else {
                diff >= 0.0 || rng.gen::<f64>() < (diff / t).exp()
            };
            if accept {
                cur = if cur == f64::NEG_INFINITY { sc.total(&x) } else { cur + diff };
                if greater(cur, best.1) {
                    best = (x.clone(), cur);
                }
            } else {
                x[i] = old;
            }
        }
        t *= schedule.cooling;
    }
    let exact = sc.total(&best.0);
    Ok((best.0, exact))
}
