#![allow(dead_code)]

use pgm::{BayesianNetwork, Factor, MarkovRandomField, Var, Variable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vars(n: usize, max_card: usize, r: &mut ChaCha8Rng) -> Vec<Var> {
    (0..n).map(|i| Variable::with_cardinality(format!("v{i}"), r.gen_range(2..=max_card)).unwrap()).collect()
}

pub fn random_table(scope: &[Var], r: &mut ChaCha8Rng) -> Factor {
    Factor::from_fn(scope.to_vec(), pgm::Domain::Linear, |_| r.gen_range(0.05..1.0)).unwrap()
}

/// Random DAG over `n` nodes with edge probability `p`, respecting a random order.
pub fn random_bn(n: usize, max_card: usize, p: f64, max_parents: usize, r: &mut ChaCha8Rng) -> BayesianNetwork {
    let vs = vars(n, max_card, r);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut cpds = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let mut parents = Vec::new();
        for &j in &order[..k] {
            if parents.len() < max_parents && r.gen_bool(p) {
                parents.push(vs[j].clone());
            }
        }
        let card = vs[i].cardinality();
        let rows: usize = parents.iter().map(|v| v.cardinality()).product();
        let mut values = Vec::new();
        for _ in 0..rows {
            let row: Vec<f64> = (0..card).map(|_| r.gen_range(0.05..1.0)).collect();
            let s: f64 = row.iter().sum();
            values.extend(row.iter().map(|x| x / s));
        }
        cpds.push(pgm::models::cpd_from_rows(vs[i].clone(), parents, values).unwrap());
    }
    BayesianNetwork::new(vs, cpds).unwrap()
}

/// Random MRF: unary factors on some variables plus random pairwise/triple factors.
pub fn random_mrf(n: usize, max_card: usize, n_factors: usize, max_arity: usize, r: &mut ChaCha8Rng) -> MarkovRandomField {
    let vs = vars(n, max_card, r);
    let mut factors = Vec::new();
    for v in &vs {
        if r.gen_bool(0.5) {
            factors.push(random_table(&[v.clone()], r));
        }
    }
    for _ in 0..n_factors {
        let k = r.gen_range(1..=max_arity.min(n));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(r);
        let scope: Vec<Var> = idx[..k].iter().map(|&i| vs[i].clone()).collect();
        factors.push(random_table(&scope, r));
    }
    MarkovRandomField::new(vs, factors).unwrap()
}

/// Random tree-structured pairwise MRF (random recursive tree) with unaries.
pub fn random_tree_mrf(n: usize, max_card: usize, r: &mut ChaCha8Rng) -> MarkovRandomField {
    let vs = vars(n, max_card, r);
    let mut factors = Vec::new();
    for v in &vs {
        factors.push(random_table(&[v.clone()], r));
    }
    for i in 1..n {
        let j = r.gen_range(0..i);
        factors.push(random_table(&[vs[j].clone(), vs[i].clone()], r));
    }
    MarkovRandomField::new(vs, factors).unwrap()
}

/// Random binary pairwise MRF on the given edges.
pub fn pairwise_mrf(n: usize, edges: &[(usize, usize)], r: &mut ChaCha8Rng) -> MarkovRandomField {
    let vs: Vec<Var> = (0..n).map(|i| Variable::with_cardinality(format!("x{i}"), 2).unwrap()).collect();
    let mut factors: Vec<Factor> = vs.iter().map(|v| random_table(&[v.clone()], r)).collect();
    for &(a, b) in edges {
        factors.push(random_table(&[vs[a].clone(), vs[b].clone()], r));
    }
    MarkovRandomField::new(vs, factors).unwrap()
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}
