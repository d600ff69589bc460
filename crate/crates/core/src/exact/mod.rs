//! Exact inference: variable elimination, tree belief propagation and junction trees.

mod elimination;
mod junction_tree;
mod ordering;
mod tree_bp;

pub use elimination::{eliminate_ordered, ve_marginal, variable_elimination, Eliminated, VeResult};
pub use junction_tree::{build_junction_tree, build_junction_tree_with, jt_calibrate, junction_tree_map, JunctionTree};
pub use ordering::{choose_ordering, given_ordering, EliminationOrdering, Heuristic};
pub use tree_bp::{tree_bp, tree_map, tree_max_product, MessageStore, TreeBp};

use crate::error::Result;
use crate::factor::Evidence;
use crate::models::{FactorGraph, FactorModel};

/// Relative slack under which two max-marginal values count as tied.
const TIE_TOL: f64 = 1e-12;

fn maximizers(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(0.0, f64::max);
    (0..values.len()).filter(|&s| values[s] >= best * (1.0 - TIE_TOL)).collect()
}

/// Lexicographically first maximizer in model variable order.
///
/// `run` calibrates under the given evidence and returns every variable's
/// max-marginal (empty for observed ones) together with a back-pointer decode.
/// When each free variable has a single maximizing state the maximizer is
/// unique and the decode is returned as is; otherwise variables are clamped
/// one at a time to their lowest maximizing state.
pub(crate) fn first_maximizer<M: FactorModel + ?Sized>(
    model: &M,
    evidence: &Evidence,
    mut run: impl FnMut(&Evidence) -> Result<(Vec<Vec<f64>>, Vec<usize>)>,
) -> Result<Vec<usize>> {
    let (mut mm, x) = run(evidence)?;
    let vars = model.variables();
    let free: Vec<usize> = (0..vars.len()).filter(|&i| !evidence.contains_key(vars[i].name())).collect();
    if free.iter().all(|&i| maximizers(&mm[i]).len() == 1) {
        return Ok(x);
    }
    let mut ev = evidence.clone();
    for (k, &i) in free.iter().enumerate() {
        ev.insert(vars[i].name().to_string(), maximizers(&mm[i])[0]);
        if k + 1 < free.len() {
            mm = run(&ev)?.0;
        }
    }
    Ok(vars.iter().map(|v| ev[v.name()]).collect())
}

/// Maximizing assignment (model variable order) and its log score.
///
/// Tree-structured models use max-product with back-pointers; others go
/// through a max-product calibrated junction tree. Ties resolve to the
/// lexicographically first maximizer, as in enumeration.
pub fn max_product_decode<M: FactorModel + ?Sized>(model: &M, evidence: &Evidence) -> Result<(Vec<usize>, f64)> {
    if FactorGraph::from_model(model).is_forest() {
        tree_map(model, evidence)
    } else {
        junction_tree_map(model, evidence)
    }
}
