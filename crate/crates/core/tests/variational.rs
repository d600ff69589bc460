mod common;

use common::*;
use pgm::exact::tree_bp;
use pgm::models::{enumerate_joint, enumerate_marginal, enumerate_partition, DEFAULT_CAP};
use pgm::variational::*;
use pgm::{Evidence, Factor, FactorModel, MarkovRandomField, Variable};
use rand::Rng;

fn random_q(m: &MarkovRandomField, r: &mut impl Rng) -> FactoredDistribution {
    let tables = m
        .variables()
        .iter()
        .map(|v| {
            let w: Vec<f64> = (0..v.cardinality()).map(|_| r.gen_range(0.0..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    FactoredDistribution::new(m.variables().to_vec(), tables).unwrap()
}

#[test]
fn kl_basics() {
    let v = Variable::with_cardinality("a", 2).unwrap();
    let q = Factor::new(vec![v.clone()], vec![1.0, 0.0]).unwrap();
    let p = Factor::new(vec![v.clone()], vec![0.5, 0.5]).unwrap();
    assert!((kl_divergence(&q, &p).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    assert_eq!(kl_divergence(&p, &q).unwrap(), f64::INFINITY);
    let mut r = rng(30);
    for _ in 0..200 {
        let m = random_mrf(3, 3, 2, 3, &mut r);
        let a = enumerate_joint(&m, DEFAULT_CAP).unwrap();
        let b = random_q(&m, &mut r).joint().unwrap();
        assert!(kl_divergence(&b, &a).unwrap() >= -1e-12);
        assert!(kl_divergence(&a, &b).unwrap() >= -1e-12);
    }
}

#[test]
fn elbo_bounds_and_gap_identity() {
    let mut r = rng(31);
    for _ in 0..100 {
        let n = r.gen_range(1..=6);
        let m = random_mrf(n, 2, n, 3, &mut r);
        let q = random_q(&m, &mut r);
        let lz = enumerate_partition(&m, &Evidence::new()).unwrap().ln();
        let e = elbo(&m, &q).unwrap();
        assert!(e <= lz + 1e-9);
        let p = enumerate_joint(&m, DEFAULT_CAP).unwrap();
        let kl = kl_divergence(&q.joint().unwrap(), &p).unwrap();
        assert!((lz - e - kl).abs() < 1e-9);
    }
}

#[test]
fn elbo_is_tight_at_the_truth() {
    let v = Variable::with_cardinality("a", 3).unwrap();
    let m = MarkovRandomField::new(vec![v.clone()], vec![Factor::new(vec![v.clone()], vec![1.0, 2.0, 5.0]).unwrap()]).unwrap();
    let q = FactoredDistribution::new(vec![v.clone()], vec![vec![0.125, 0.25, 0.625]]).unwrap();
    assert!((elbo(&m, &q).unwrap() - 8f64.ln()).abs() < 1e-12);
    let u = MarkovRandomField::new(vec![v.clone()], vec![Factor::new(vec![v.clone()], vec![2.0; 3]).unwrap()]).unwrap();
    assert!((elbo(&u, &FactoredDistribution::uniform(vec![v])).unwrap() - 6f64.ln()).abs() < 1e-12);
}

#[test]
fn mean_field_on_independent_variables() {
    let mut r = rng(32);
    let m = pairwise_mrf(2, &[], &mut r);
    let (q, trace) = mean_field(&m, &Evidence::new(), &MeanFieldOptions::default()).unwrap();
    let lz = enumerate_partition(&m, &Evidence::new()).unwrap().ln();
    for v in m.variable_names() {
        let t = enumerate_marginal(&m, &[v], &Evidence::new()).unwrap();
        assert_close(q.get(v).unwrap(), t.values(), 1e-12);
    }
    assert!((trace.sweeps[0] - lz).abs() < 1e-12);
}

#[test]
fn mean_field_gap_is_kl() {
    let mut r = rng(33);
    let m = pairwise_mrf(3, &[(0, 1), (1, 2)], &mut r);
    let (q, trace) = mean_field(&m, &Evidence::new(), &MeanFieldOptions::default()).unwrap();
    let lz = enumerate_partition(&m, &Evidence::new()).unwrap().ln();
    let kl = kl_divergence(&q.joint().unwrap(), &enumerate_joint(&m, DEFAULT_CAP).unwrap()).unwrap();
    assert!(trace.final_elbo() <= lz + 1e-9);
    assert!((lz - trace.final_elbo() - kl).abs() < 1e-9);
    assert!((trace.kl_gap.unwrap() - kl).abs() < 1e-9);
    assert!(trace.converged);
}

#[test]
fn mean_field_is_monotone_on_a_frustrated_square() {
    let vars: Vec<_> = (0..4).map(|i| Variable::with_cardinality(format!("s{i}"), 2).unwrap()).collect();
    let ferro = [2.0, 0.5, 0.5, 2.0];
    let anti = [0.5, 2.0, 2.0, 0.5];
    let mut factors = Vec::new();
    for (k, (a, b)) in [(0, 1), (1, 2), (2, 3), (3, 0)].into_iter().enumerate() {
        let t = if k == 3 { anti } else { ferro };
        factors.push(Factor::new(vec![vars[a].clone(), vars[b].clone()], t.to_vec()).unwrap());
    }
    factors.push(Factor::new(vec![vars[0].clone()], vec![1.2, 1.0]).unwrap());
    let m = MarkovRandomField::new(vars, factors).unwrap();
    let opts = MeanFieldOptions { max_sweeps: 50, tol: 0.0, ..Default::default() };
    let (_, trace) = mean_field(&m, &Evidence::new(), &opts).unwrap();
    assert_eq!(trace.sweeps.len(), 50);
    assert_eq!(trace.violations(1e-10), 0);
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 1 + 50 * 4);
}

#[test]
fn mean_field_with_evidence_and_restarts() {
    let mut r = rng(34);
    let m = pairwise_mrf(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], &mut r);
    let mut e = Evidence::new();
    e.insert("x1".into(), 1);
    let opts = MeanFieldOptions { restarts: 3, seed: 5, ..Default::default() };
    let (q, trace) = mean_field(&m, &e, &opts).unwrap();
    assert_eq!(q.variables().len(), 3);
    let lz = enumerate_partition(&m, &e).unwrap().ln();
    assert!(trace.final_elbo() <= lz + 1e-9);
}

#[test]
fn loopy_bp_is_exact_on_trees() {
    let mut r = rng(35);
    for _ in 0..20 {
        let m = random_tree_mrf(7, 3, &mut r);
        let exact = tree_bp(&m, &Evidence::new()).unwrap();
        for schedule in [Schedule::Synchronous, Schedule::Sequential] {
            let opts = LoopyOptions { max_iters: 100, damping: 1.0, tol: 1e-14, schedule };
            let l = loopy_bp(&m, &Evidence::new(), &opts).unwrap();
            assert!(l.converged);
            assert!(l.iterations <= 8);
            for v in m.variable_names() {
                assert!(l.marginal(v).unwrap().max_abs_diff(exact.marginal(v).unwrap()) < 1e-9);
            }
        }
    }
}

#[test]
fn loopy_bp_on_a_single_cycle() {
    let mut r = rng(36);
    for _ in 0..20 {
        let m = pairwise_mrf(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &mut r);
        let l = loopy_bp(&m, &Evidence::new(), &LoopyOptions::default()).unwrap();
        assert!(l.converged);
        for v in m.variable_names() {
            let t = enumerate_marginal(&m, &[v], &Evidence::new()).unwrap();
            assert!(l.marginal(v).unwrap().max_abs_diff(&t) < 0.05);
        }
    }
}

#[test]
fn loopy_bp_with_evidence_and_uniform_start() {
    let mut r = rng(37);
    let m = random_tree_mrf(5, 2, &mut r);
    let mut e = Evidence::new();
    e.insert("v3".into(), 0);
    let opts = LoopyOptions { damping: 1.0, tol: 1e-14, ..Default::default() };
    let l = loopy_bp(&m, &e, &opts).unwrap();
    let exact = tree_bp(&m, &e).unwrap();
    for v in m.variable_names() {
        assert!(l.marginal(v).unwrap().max_abs_diff(exact.marginal(v).unwrap()) < 1e-9);
    }
    let vars: Vec<_> = (0..3).map(|i| Variable::with_cardinality(format!("u{i}"), 3).unwrap()).collect();
    let u = MarkovRandomField::new(
        vars.clone(),
        vec![Factor::new(vec![vars[0].clone(), vars[1].clone()], vec![1.0; 9]).unwrap()],
    )
    .unwrap();
    let l = loopy_bp(&u, &Evidence::new(), &LoopyOptions { max_iters: 0, ..Default::default() }).unwrap();
    for f in &l.marginals {
        assert_close(f.values(), &[1.0 / 3.0; 3], 1e-15);
    }
}

#[test]
fn kl_directions_pick_different_optima() {
    let a = Variable::with_cardinality("a", 2).unwrap();
    let b = Variable::with_cardinality("b", 2).unwrap();
    let p = Factor::new(vec![a.clone(), b.clone()], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
    let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let mut best_rev = (f64::INFINITY, 0.0, 0.0);
    let mut best_fwd = (f64::INFINITY, 0.0, 0.0);
    for &s in &grid {
        for &t in &grid {
            let q = FactoredDistribution::new(vec![a.clone(), b.clone()], vec![vec![s, 1.0 - s], vec![t, 1.0 - t]])
                .unwrap()
                .joint()
                .unwrap();
            let rev = kl_divergence(&q, &p).unwrap();
            let fwd = kl_divergence(&p, &q).unwrap();
            if rev < best_rev.0 {
                best_rev = (rev, s, t);
            }
            if fwd < best_fwd.0 {
                best_fwd = (fwd, s, t);
            }
        }
    }
    assert_eq!((best_fwd.1, best_fwd.2), (0.5, 0.5));
    assert!((best_rev.1 - 0.5).abs() > 0.2 && (best_rev.2 - 0.5).abs() > 0.2);
}
