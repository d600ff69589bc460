use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::models::FactorModel;

/// Greedy elimination heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Ordering supplied by the caller.
    Given,
    /// Fewest current neighbours.
    MinNeighbors,
    /// Smallest product of cardinalities of the node and its neighbours.
    MinWeight,
    /// Fewest fill edges introduced.
    MinFill,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Given => "given",
            Heuristic::MinNeighbors => "min_neighbors",
            Heuristic::MinWeight => "min_weight",
            Heuristic::MinFill => "min_fill",
        }
    }
}

impl std::str::FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "given" => Ok(Heuristic::Given),
            "min_neighbors" => Ok(Heuristic::MinNeighbors),
            "min_weight" => Ok(Heuristic::MinWeight),
            "min_fill" => Ok(Heuristic::MinFill),
            _ => Err(Error::Argument(format!("unknown heuristic `{s}`"))),
        }
    }
}

/// Elimination order with the induced width it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrdering {
    pub order: Vec<String>,
    pub heuristic: Heuristic,
    /// Largest number of neighbours a variable has when it is eliminated.
    pub induced_width: usize,
}

/// Greedy ordering of every non-query variable over the model's interaction graph.
pub fn choose_ordering<M: FactorModel + ?Sized>(
    model: &M,
    heuristic: Heuristic,
    query: &[&str],
) -> Result<EliminationOrdering> {
    for q in query {
        model.variable_index(q)?;
    }
    let g = model.interaction_graph();
    let cards = cards_by_node(model, &g);
    let eliminate: BTreeSet<usize> = (0..g.len()).filter(|&i| !query.contains(&g.name(i))).collect();
    let h = if heuristic == Heuristic::Given { Heuristic::MinFill } else { heuristic };
    let (order, width) = greedy(&g, &cards, &eliminate, h);
    Ok(EliminationOrdering { order: order.into_iter().map(|i| g.name(i).to_string()).collect(), heuristic: h, induced_width: width })
}

/// Wrap a caller-supplied order, computing its induced width.
pub fn given_ordering<M: FactorModel + ?Sized>(model: &M, order: &[&str]) -> Result<EliminationOrdering> {
    let g = model.interaction_graph();
    let mut idx = Vec::new();
    let mut seen = BTreeSet::new();
    for name in order {
        let i = g.index(name).map_err(|_| Error::Ordering(format!("unknown variable `{name}`")))?;
        if !seen.insert(i) {
            return Err(Error::Ordering(format!("`{name}` appears twice")));
        }
        idx.push(i);
    }
    Ok(EliminationOrdering {
        order: order.iter().map(|s| s.to_string()).collect(),
        heuristic: Heuristic::Given,
        induced_width: simulate(&g, &idx),
    })
}

pub(crate) fn cards_by_node<M: FactorModel + ?Sized>(model: &M, g: &UndirectedGraph) -> Vec<usize> {
    (0..g.len()).map(|i| model.variable(g.name(i)).map(|v| v.cardinality()).unwrap_or(1)).collect()
}

/// Induced width of eliminating `order` from `g`.
pub(crate) fn simulate(g: &UndirectedGraph, order: &[usize]) -> usize {
    let mut adj: Vec<BTreeSet<usize>> = (0..g.len()).map(|i| g.neighbors_idx(i).clone()).collect();
    let mut width = 0;
    for &v in order {
        width = width.max(adj[v].len());
        eliminate_node(&mut adj, v);
    }
    width
}

fn eliminate_node(adj: &mut [BTreeSet<usize>], v: usize) {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    for (k, &a) in nb.iter().enumerate() {
        for &b in &nb[k + 1..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    for &a in &nb {
        adj[a].remove(&v);
    }
    adj[v].clear();
}

pub(crate) fn greedy(
    g: &UndirectedGraph,
    cards: &[usize],
    eliminate: &BTreeSet<usize>,
    heuristic: Heuristic,
) -> (Vec<usize>, usize) {
    let mut adj: Vec<BTreeSet<usize>> = (0..g.len()).map(|i| g.neighbors_idx(i).clone()).collect();
    let mut left = eliminate.clone();
    let mut order = Vec::with_capacity(left.len());
    let mut width = 0;
    while !left.is_empty() {
        let cost = |v: usize| -> u128 {
            match heuristic {
                Heuristic::MinNeighbors | Heuristic::Given => adj[v].len() as u128,
                Heuristic::MinWeight => adj[v].iter().fold(cards[v] as u128, |w, &u| w.saturating_mul(cards[u] as u128)),
                Heuristic::MinFill => {
                    let nb: Vec<usize> = adj[v].iter().copied().collect();
                    let mut fill = 0;
                    for (k, &a) in nb.iter().enumerate() {
                        for &b in &nb[k + 1..] {
                            if !adj[a].contains(&b) {
                                fill += 1;
                            }
                        }
                    }
                    fill
                }
            }
        };
        // node indices follow name order, so the first minimum is the name-least
        let v = *left.iter().min_by_key(|&&v| cost(v)).unwrap();
        width = width.max(adj[v].len());
        eliminate_node(&mut adj, v);
        left.remove(&v);
        order.push(v);
    }
    (order, width)
}
