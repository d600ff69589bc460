use std::collections::BTreeSet;

use super::ordering::{cards_by_node, greedy, EliminationOrdering, Heuristic};
use crate::error::{Error, Result};
use crate::factor::{self, Domain, Evidence, Scalar, Semiring};
use crate::graph::UndirectedGraph;
use crate::models::{check_evidence, FactorModel, MarkovRandomField};
use crate::Factor;

/// Outcome of [`eliminate_ordered`].
#[derive(Debug, Clone)]
pub struct Eliminated<T: Scalar> {
    /// Factors left after all eliminations.
    pub factors: Vec<factor::Factor<T>>,
    /// Scale divided out of each intermediate factor (all ones without renormalization).
    pub scales: Vec<T>,
    /// Largest scope of an intermediate product.
    pub max_scope: usize,
}

/// Eliminate variables one at a time in the given order.
///
/// Each step multiplies the factors mentioning the variable and aggregates it
/// out. With `renormalize`, each new factor is divided by its aggregate (sum,
/// or maximum for max-product) and that scale is reported.
pub fn eliminate_ordered<T: Scalar>(
    mut factors: Vec<factor::Factor<T>>,
    order: &[&str],
    semiring: Semiring,
    renormalize: bool,
) -> Result<Eliminated<T>> {
    let mut scales = Vec::new();
    let mut max_scope = 0;
    for &var in order {
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let mut it = touching.into_iter();
        let Some(first) = it.next() else { continue };
        let mut prod = first;
        for f in it {
            prod = prod.combine(&f, semiring)?;
        }
        max_scope = max_scope.max(prod.scope().len());
        let mut msg = prod.eliminate(&[var], semiring)?;
        if renormalize {
            let scale = aggregate_all(&msg, semiring)?;
            if !(scale > T::zero()) {
                return Err(Error::ZeroEvidence);
            }
            msg = msg.map(|x| x / scale);
            scales.push(scale);
        }
        factors.push(msg);
    }
    Ok(Eliminated { factors, scales, max_scope })
}

fn aggregate_all<T: Scalar>(f: &factor::Factor<T>, semiring: Semiring) -> Result<T> {
    let mut acc: Option<T> = None;
    for &x in f.values() {
        acc = Some(match acc {
            None => x,
            Some(a) => semiring
                .aggregate(f.domain(), a, x)
                .ok_or_else(|| Error::Unsupported("log-domain summation needs a floating-point scalar".into()))?,
        });
    }
    Ok(acc.unwrap_or_else(T::zero))
}

/// Result of variable elimination.
///
/// The unnormalized answer is `factor · exp(log_normalizer)`. For sum-product
/// `factor` sums to one, so it is `p(query | evidence)` and `log_normalizer`
/// is `log p(evidence)` (log Z(evidence) for an MRF). For max-product the
/// largest entry of `factor` is one and `log_normalizer` is the log of the
/// maximal joint score.
#[derive(Debug, Clone)]
pub struct VeResult {
    pub factor: Factor,
    pub log_normalizer: f64,
    pub ordering: Vec<String>,
    pub max_scope: usize,
}

impl VeResult {
    pub fn unnormalized(&self) -> Factor {
        let s = self.log_normalizer.exp();
        self.factor.map(|x| x * s)
    }
}

/// Sum-product or max-product variable elimination.
///
/// `ordering` may list evidence or query variables; they are skipped. Without
/// an ordering, min-fill over the evidence-reduced interaction graph is used.
pub fn variable_elimination<M: FactorModel + ?Sized>(
    model: &M,
    query: &[&str],
    evidence: &Evidence,
    semiring: Semiring,
    ordering: Option<&EliminationOrdering>,
) -> Result<VeResult> {
    if !matches!(semiring, Semiring::SumProduct | Semiring::MaxProduct) {
        return Err(Error::Unsupported(format!("variable elimination over {} models", semiring.name())));
    }
    check_evidence(model, evidence)?;
    let mut qset = BTreeSet::new();
    for q in query {
        model.variable_index(q)?;
        if evidence.contains_key(*q) {
            return Err(Error::Argument(format!("`{q}` is both queried and observed")));
        }
        if !qset.insert(*q) {
            return Err(Error::Argument(format!("`{q}` queried twice")));
        }
    }
    let reduced: Vec<Factor> = model.factors().iter().map(|f| f.reduce(evidence)).collect::<Result<_>>()?;
    let hidden: Vec<&str> = model
        .variable_names()
        .into_iter()
        .filter(|n| !qset.contains(n) && !evidence.contains_key(*n))
        .collect();
    let order: Vec<String> = match ordering {
        Some(o) => {
            let order: Vec<String> = o.order.iter().filter(|n| hidden.contains(&n.as_str())).cloned().collect();
            if order.len() != hidden.len() {
                return Err(Error::Ordering("ordering does not cover every hidden variable".into()));
            }
            for n in &o.order {
                if qset.contains(n.as_str()) {
                    return Err(Error::Ordering(format!("ordering eliminates query variable `{n}`")));
                }
            }
            order
        }
        None => {
            let vars: Vec<_> = model.variables().iter().filter(|v| !evidence.contains_key(v.name())).cloned().collect();
            let sub = MarkovRandomField::new(vars, reduced.clone())?;
            let g: UndirectedGraph = sub.interaction_graph();
            let cards = cards_by_node(&sub, &g);
            let elim = hidden.iter().map(|n| g.index(n)).collect::<Result<BTreeSet<usize>>>()?;
            let (o, _) = greedy(&g, &cards, &elim, Heuristic::MinFill);
            o.into_iter().map(|i| g.name(i).to_string()).collect()
        }
    };
    let order_refs: Vec<&str> = order.iter().map(String::as_str).collect();
    let out = eliminate_ordered(reduced, &order_refs, semiring, true)?;
    let qvars: Vec<_> = query.iter().map(|q| model.variable(q).cloned()).collect::<Result<_>>()?;
    let mut result = Factor::ones(qvars)?;
    for f in &out.factors {
        result = result.combine(f, semiring)?;
    }
    let result = result.permute(query)?;
    let z = match semiring {
        Semiring::MaxProduct => result.values().iter().copied().fold(0.0, f64::max),
        _ => result.total(),
    };
    if !(z > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    let log_normalizer = out.scales.iter().map(|s| s.ln()).sum::<f64>() + z.ln();
    debug_assert_eq!(result.domain(), Domain::Linear);
    Ok(VeResult { factor: result.map(|x| x / z), log_normalizer, ordering: order, max_scope: out.max_scope })
}

/// `p(query | evidence)` by sum-product elimination with min-fill ordering.
pub fn ve_marginal<M: FactorModel + ?Sized>(model: &M, query: &[&str], evidence: &Evidence) -> Result<Factor> {
    Ok(variable_elimination(model, query, evidence, Semiring::SumProduct, None)?.factor)
}
