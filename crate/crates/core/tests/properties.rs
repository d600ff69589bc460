//! Property tests over randomly generated factors, graphs, models and data.

mod common;

use std::collections::BTreeSet;

use common::*;
use pgm::exact::{
    build_junction_tree, choose_ordering, given_ordering, max_product_decode, tree_bp, variable_elimination, Heuristic,
};
use pgm::io::{parse_model, serialize_model};
use pgm::learning::{
    bayesian_bn, bn_log_likelihood, chow_liu, counts, dirichlet_posterior, em_gmm, family_score, mle_bn,
    mutual_information, pc, CiSource, Dataset, DirichletParams, GmmOptions, PcOptions, ScoreKind,
};
use pgm::map::{
    dual_decomposition, graphcut_map, local_search_map, min_cut, normalize_energies, DualOptions, FlowNetwork,
    PairwiseEnergyModel,
};
use pgm::models::{enumerate_joint, enumerate_marginal, enumerate_partition, log_joint, FactorGraph, DEFAULT_CAP};
use pgm::sampling::{
    forward_sample, gibbs, gibbs_transition_matrix, importance_estimate, mh_transition_matrix, Proposal, RandomSource,
    SingleFlipUniform,
};
use pgm::variational::{elbo, loopy_bp, mean_field, FactoredDistribution, LoopyOptions, MeanFieldOptions};
use pgm::{
    DirectedGraph, Domain, Evidence, Factor, FactorModel, MarkovRandomField, Model, Semiring, UndirectedGraph, Var,
    Variable,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn universe() -> Vec<Var> {
    (0..4).map(|i| Variable::with_cardinality(format!("x{i}"), 2 + i % 2).unwrap()).collect()
}

/// A factor over a random subset of a fixed four-variable universe.
fn factor_strategy() -> impl Strategy<Value = Factor> {
    (1u8..16, any::<u64>()).prop_map(|(mask, seed)| {
        let mut r = rng(seed);
        let scope: Vec<Var> = universe().into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, v)| v).collect();
        random_table(&scope, &mut r)
    })
}

fn aligned(f: &Factor, order: &[&str]) -> Vec<f64> {
    f.permute(order).unwrap().values().to_vec()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

/// Normalized enumerated joint as a flat vector.
fn joint<M: FactorModel + ?Sized>(m: &M) -> Vec<f64> {
    let j = enumerate_joint(m, DEFAULT_CAP).unwrap();
    let z = j.total();
    j.values().iter().map(|x| x / z).collect()
}

fn random_evidence<M: FactorModel + ?Sized>(m: &M, r: &mut ChaCha8Rng, max: usize) -> Evidence {
    let mut ev = Evidence::new();
    let mut idx: Vec<usize> = (0..m.variables().len()).collect();
    idx.shuffle(r);
    for &i in idx.iter().take(r.gen_range(0..=max)) {
        let v = &m.variables()[i];
        ev.insert(v.name().to_string(), r.gen_range(0..v.cardinality()));
    }
    ev
}

fn random_dag(n: usize, p: f64, r: &mut ChaCha8Rng) -> DirectedGraph {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut g = DirectedGraph::new(&names);
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(p) {
                g.add_edge(&names[order[a]], &names[order[b]]).unwrap();
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn product_is_commutative_and_associative(f in factor_strategy(), g in factor_strategy(), h in factor_strategy()) {
        let fg = f.product(&g).unwrap();
        let gf = g.product(&f).unwrap();
        let order: Vec<&str> = fg.names();
        prop_assert!(close(fg.values(), &aligned(&gf, &order), 1e-12));
        let left = fg.product(&h).unwrap();
        let right = f.product(&g.product(&h).unwrap()).unwrap();
        let order: Vec<&str> = left.names();
        prop_assert!(close(left.values(), &aligned(&right, &order), 1e-12));
    }

    #[test]
    fn elimination_of_disjoint_sets_commutes(f in factor_strategy(), split in any::<u64>()) {
        let names = f.names();
        let a: Vec<&str> = names.iter().enumerate().filter(|(i, _)| split & (1 << i) != 0).map(|(_, n)| *n).collect();
        let b: Vec<&str> = names.iter().copied().filter(|n| !a.contains(n)).collect();
        let stepwise = f.eliminate(&a, Semiring::SumProduct).unwrap().eliminate(&b, Semiring::SumProduct).unwrap();
        let all: Vec<&str> = a.iter().chain(&b).copied().collect();
        let joint = f.eliminate(&all, Semiring::SumProduct).unwrap();
        prop_assert!(close(stepwise.values(), joint.values(), 1e-12));
        prop_assert_eq!(joint.values().len(), 1);
        let direct: f64 = f.values().iter().sum();
        prop_assert!((joint.values()[0] - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn log_domain_product_matches_linear(f in factor_strategy(), g in factor_strategy()) {
        let lin = f.product(&g).unwrap();
        let log = f.to_log().product(&g.to_log()).unwrap().to_linear();
        prop_assert_eq!(log.domain(), Domain::Linear);
        let order: Vec<&str> = lin.names();
        let log = aligned(&log, &order);
        for (x, y) in lin.values().iter().zip(&log) {
            if *x >= 1e-300 {
                prop_assert!((x - y).abs() <= 1e-9 * x);
            }
        }
    }

    #[test]
    fn or_and_decides_satisfiability(seed in any::<u64>(), n_factors in 1usize..5) {
        let mut r = rng(seed);
        let vars: Vec<Var> = (0..4).map(|i| Variable::with_cardinality(format!("b{i}"), 2).unwrap()).collect();
        let mut factors = Vec::new();
        for _ in 0..n_factors {
            let mut idx: Vec<usize> = (0..4).collect();
            idx.shuffle(&mut r);
            let scope: Vec<Var> = idx[..r.gen_range(1..=3)].iter().map(|&i| vars[i].clone()).collect();
            let p_true = r.gen_range(0.2..0.9);
            factors.push(Factor::from_fn(scope, Domain::Linear, |_| if r.gen_bool(p_true) { 1.0 } else { 0.0 }).unwrap());
        }
        let mut conj = Factor::ones(vec![]).unwrap();
        for f in &factors {
            conj = conj.combine(f, Semiring::OrAnd).unwrap();
        }
        let names: Vec<&str> = conj.names();
        let decided = conj.eliminate(&names, Semiring::OrAnd).unwrap().values()[0] != 0.0;
        let mut brute = false;
        for code in 0..16usize {
            let ev: Evidence = (0..4).map(|i| (format!("b{i}"), (code >> i) & 1)).collect();
            if factors.iter().all(|f| f.value_at(&ev).unwrap() != 0.0) {
                brute = true;
            }
        }
        prop_assert_eq!(decided, brute);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn graph_operations(seed in any::<u64>(), n in 2usize..8, p in 0.1f64..0.7) {
        let mut r = rng(seed);
        let g = random_dag(n, p, &mut r);
        let moral = g.moralize().unwrap();
        for (a, b) in g.skeleton().edges() {
            prop_assert!(moral.has_edge(a, b));
        }
        let mut order: Vec<&str> = moral.nodes().iter().map(String::as_str).collect();
        order.shuffle(&mut r);
        let (tri, _) = moral.triangulate(&order).unwrap();
        let (again, _) = tri.triangulate(&order).unwrap();
        prop_assert_eq!(tri.edge_count(), again.edge_count());
        prop_assert!(tri.is_chordal());

        let names: Vec<&str> = g.nodes().iter().map(String::as_str).collect();
        for _ in 0..10 {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut r);
            let x = [names[idx[0]]];
            let y = [names[idx[1]]];
            let k = r.gen_range(0..=n - 2);
            let z: Vec<&str> = idx[2..2 + k].iter().map(|&i| names[i]).collect();
            prop_assert_eq!(g.d_separated(&x, &y, &z).unwrap(), g.d_separated(&y, &x, &z).unwrap());
        }
    }

    #[test]
    fn spanning_tree_has_n_minus_one_edges(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let mut g = UndirectedGraph::new(&names);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(&names[a], &names[b]).unwrap();
            }
        }
        let w: Vec<f64> = (0..n * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let t = g.max_weight_spanning_tree(|a, b| {
            let (i, j) = (g.index(a).unwrap(), g.index(b).unwrap());
            w[i.min(j) * n + i.max(j)]
        });
        prop_assert_eq!(t.tree.edge_count(), n - 1);
        prop_assert!(t.tree.is_connected() && t.connected);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn d_separation_implies_independence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let bn = random_bn(5, 2, 0.4, 3, &mut r);
        let names = bn.variable_names();
        let pj = joint(&bn);
        for _ in 0..10 {
            let mut idx: Vec<usize> = (0..5).collect();
            idx.shuffle(&mut r);
            let (x, y) = (idx[0], idx[1]);
            let z: Vec<usize> = idx[2..2 + r.gen_range(0..=3)].to_vec();
            let zn: Vec<&str> = z.iter().map(|&i| names[i]).collect();
            if !bn.dag().d_separated(&[names[x]], &[names[y]], &zn).unwrap() {
                continue;
            }
            for zc in 0..1usize << z.len() {
                let mut m = [[0.0f64; 2]; 2];
                for (code, p) in pj.iter().enumerate() {
                    let bit = |i: usize| (code >> (4 - i)) & 1;
                    if z.iter().enumerate().all(|(k, &zi)| bit(zi) == (zc >> k) & 1) {
                        m[bit(x)][bit(y)] += p;
                    }
                }
                let pz: f64 = m.iter().flatten().sum();
                if pz > 1e-12 {
                    for a in 0..2 {
                        for b in 0..2 {
                            let lhs = m[a][b] / pz;
                            let rhs = (m[a][0] + m[a][1]) / pz * (m[0][b] + m[1][b]) / pz;
                            prop_assert!((lhs - rhs).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bayesian_networks_are_normalized(seed in any::<u64>()) {
        let mut r = rng(seed);
        let bn = random_bn(r.gen_range(2..=6), 2, 0.5, 3, &mut r);
        prop_assert!((enumerate_partition(&bn, &Evidence::new()).unwrap() - 1.0).abs() < 1e-9);
        let n = bn.variables().len();
        let mut total = 0.0;
        for code in 0..1usize << n {
            let x: Vec<usize> = (0..n).map(|i| (code >> (n - 1 - i)) & 1).collect();
            total += log_joint(&bn, &x).unwrap().exp();
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
        let mrf = bn.to_mrf();
        let a = joint(&bn);
        let b = joint(&mrf);
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        prop_assert!(FactorGraph::from_model(&bn).is_bipartite());
    }

    #[test]
    fn exact_engines_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(2..=7), 3, r.gen_range(2..=6), 3, &mut r);
        let ev = random_evidence(&m, &mut r, 2);
        let mut jt = build_junction_tree(&m).unwrap();
        if enumerate_partition(&m, &ev).unwrap() <= 0.0 {
            return Ok(());
        }
        jt.calibrate(&ev, Semiring::SumProduct).unwrap();
        let forest = FactorGraph::from_model(&m).is_forest();
        let bp = if forest { Some(tree_bp(&m, &ev).unwrap()) } else { None };
        for v in m.variable_names().into_iter().filter(|v| !ev.contains_key(*v)) {
            let truth = enumerate_marginal(&m, &[v], &ev).unwrap().normalize().unwrap().0;
            let ve = variable_elimination(&m, &[v], &ev, Semiring::SumProduct, None).unwrap().factor;
            prop_assert!(truth.max_abs_diff(&ve) < 1e-9);
            prop_assert!(truth.max_abs_diff(&jt.query(v).unwrap().normalize().unwrap().0) < 1e-9);
            if let Some(bp) = &bp {
                prop_assert!(truth.max_abs_diff(&bp.marginal(v).unwrap().normalize().unwrap().0) < 1e-9);
            }
        }
    }

    #[test]
    fn elimination_order_does_not_change_the_answer(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(3..=7), 3, r.gen_range(2..=6), 3, &mut r);
        let names = m.variable_names();
        let q = names[r.gen_range(0..names.len())];
        let reference = variable_elimination(&m, &[q], &Evidence::new(), Semiring::SumProduct, None).unwrap();
        let mut orderings: Vec<_> = [Heuristic::MinNeighbors, Heuristic::MinWeight, Heuristic::MinFill]
            .into_iter()
            .map(|h| choose_ordering(&m, h, &[q]).unwrap())
            .collect();
        for _ in 0..10 {
            let mut o: Vec<&str> = names.iter().copied().filter(|n| *n != q).collect();
            o.shuffle(&mut r);
            orderings.push(given_ordering(&m, &o).unwrap());
        }
        for o in &orderings {
            let res = variable_elimination(&m, &[q], &Evidence::new(), Semiring::SumProduct, Some(o)).unwrap();
            prop_assert!(res.factor.max_abs_diff(&reference.factor) < 1e-12);
            prop_assert!((res.log_normalizer - reference.log_normalizer).abs() < 1e-12 * (1.0 + reference.log_normalizer.abs()));
        }
        let full = choose_ordering(&m, Heuristic::MinFill, &[]).unwrap();
        let res = variable_elimination(&m, &[], &Evidence::new(), Semiring::SumProduct, Some(&full)).unwrap();
        prop_assert_eq!(res.max_scope, full.induced_width + 1);
    }

    #[test]
    fn junction_tree_calibration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(2..=7), 3, r.gen_range(2..=6), 3, &mut r);
        let mut jt = build_junction_tree(&m).unwrap();
        prop_assert!(jt.family_preservation() && jt.running_intersection());
        jt.calibrate(&Evidence::new(), Semiring::SumProduct).unwrap();
        let beliefs = jt.beliefs().unwrap();
        let totals: Vec<f64> = beliefs.iter().map(|b| b.total()).collect();
        for t in &totals {
            prop_assert!((t - totals[0]).abs() <= 1e-9 * totals[0]);
        }
        for &(i, j) in jt.edges() {
            let a = jt.sepset_marginal(i, j).unwrap();
            let b = jt.sepset_marginal(j, i).unwrap();
            let order: Vec<&str> = a.names();
            prop_assert!(close(a.values(), &aligned(&b, &order), 1e-9));
        }
    }

    #[test]
    fn max_product_reaches_the_joint_maximum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(2..=6), 3, r.gen_range(2..=5), 3, &mut r);
        let (x, score) = max_product_decode(&m, &Evidence::new()).unwrap();
        let best = enumerate_joint(&m, DEFAULT_CAP).unwrap().values().iter().copied().fold(0.0, f64::max);
        prop_assert!((score.exp() - best).abs() <= 1e-12 * best.max(1.0));
        prop_assert!((log_joint(&m, &x).unwrap() - score).abs() < 1e-12 * (1.0 + score.abs()));
    }
}

fn random_energy(n: usize, r: &mut ChaCha8Rng) -> PairwiseEnergyModel {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let unary: Vec<[f64; 2]> = (0..n).map(|_| [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(0.5) {
                edges.push((a, b, r.gen_range(0.0..2.0)));
            }
        }
    }
    PairwiseEnergyModel::new(names, unary, edges).unwrap()
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn min_cut_matches_partition_enumeration(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let mut g = FlowNetwork::new(&names, &names[0], &names[n - 1]).unwrap();
        for a in 0..n {
            for b in 0..n {
                if a != b && r.gen_bool(0.5) {
                    g.add_arc(&names[a], &names[b], r.gen_range(0..10) as f64).unwrap();
                }
            }
        }
        let cut = min_cut(&g).unwrap();
        let mut best = f64::INFINITY;
        for code in 0..1usize << (n - 2) {
            let mut side = vec![false; n];
            side[0] = true;
            for i in 1..n - 1 {
                side[i] = (code >> (i - 1)) & 1 == 1;
            }
            best = best.min(g.cut_cost(&side));
        }
        prop_assert_eq!(cut.cost, best);
    }

    #[test]
    fn graph_cut_is_exact(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let m = random_energy(n, &mut r);
        let (x, e) = graphcut_map(&m).unwrap();
        let best = (0..1usize << n)
            .map(|code| m.energy(&(0..n).map(|i| (code >> i) & 1).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((e - best).abs() < 1e-9);
        prop_assert!((m.energy(&x) - e).abs() < 1e-9);

        let norm = normalize_energies(&m);
        let shift: f64 = m.unary().iter().map(|u| u[0].min(u[1])).sum();
        prop_assert!((norm.offset() - m.offset() - shift).abs() < 1e-12);
        for code in 0..1usize << n {
            let x: Vec<usize> = (0..n).map(|i| (code >> i) & 1).collect();
            let before = m.energy(&x) - m.offset();
            let after = norm.energy(&x) - norm.offset();
            prop_assert!((before - after - shift).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_bound_dominates(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if r.gen_bool(0.4) {
                    edges.push((a, b));
                }
            }
        }
        let m = pairwise_mrf(n, &edges, &mut r);
        let best = enumerate_joint(&m, DEFAULT_CAP).unwrap().values().iter().copied().fold(0.0, f64::max).ln();
        let res = dual_decomposition(&m, &DualOptions { max_iters: 200, ..DualOptions::default() }).unwrap();
        for b in &res.bounds {
            prop_assert!(*b >= best - 1e-9);
        }
    }

    #[test]
    fn local_search_ends_in_a_local_optimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(2..=7), 3, r.gen_range(2..=6), 3, &mut r);
        let (x, score) = local_search_map(&m, seed, 1000).unwrap();
        for i in 0..x.len() {
            for s in 0..m.variables()[i].cardinality() {
                let mut y = x.clone();
                y[i] = s;
                prop_assert!(log_joint(&m, &y).unwrap() <= score + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn samplers_are_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let bn = random_bn(5, 3, 0.5, 2, &mut r);
        let a = forward_sample(&bn, 50, &mut RandomSource::new(seed)).unwrap();
        let b = forward_sample(&bn, 50, &mut RandomSource::new(seed)).unwrap();
        prop_assert_eq!(a, b);
        let a = gibbs(&bn, &Evidence::new(), 50, 5, &mut RandomSource::new(seed)).unwrap();
        let b = gibbs(&bn, &Evidence::new(), 50, 5, &mut RandomSource::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn explicit_kernels_preserve_the_target(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(3, 2, 3, 3, &mut r);
        let pi = joint(&m);
        prop_assert!(gibbs_transition_matrix(&m).unwrap().stationarity_residual(&pi) <= 1e-10);
        let k = SingleFlipUniform::new(&m, &Evidence::new());
        prop_assert!(mh_transition_matrix(&m, &k).unwrap().detailed_balance_residual(&pi) <= 1e-10);
    }

    #[test]
    fn single_sample_normalized_importance_is_an_indicator(seed in any::<u64>()) {
        let mut r = rng(seed);
        let bn = random_bn(4, 2, 0.5, 2, &mut r);
        let target: Evidence = [(bn.variable_names()[0].to_string(), 0usize)].into_iter().collect();
        let est = importance_estimate(&bn, &Evidence::new(), Some(&target), &Proposal::Uniform, 1, &mut RandomSource::new(seed), true).unwrap();
        let hit = est.samples.assignments[0][0] == 0;
        prop_assert_eq!(est.estimate, if hit { 1.0 } else { 0.0 });
    }

    #[test]
    fn elbo_bounds_and_mean_field(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(2..=6), 2, r.gen_range(2..=5), 3, &mut r);
        let log_z = enumerate_partition(&m, &Evidence::new()).unwrap().ln();
        let tables: Vec<Vec<f64>> = m.variables().iter().map(|_| { let a: f64 = r.gen_range(0.01..0.99); vec![a, 1.0 - a] }).collect();
        let q = FactoredDistribution::new(m.variables().to_vec(), tables).unwrap();
        let bound = elbo(&m, &q).unwrap();
        prop_assert!(bound <= log_z + 1e-9);
        let qj = q.joint().unwrap();
        let pj = Factor::new(m.variables().to_vec(), joint(&m)).unwrap();
        let kl = pgm::variational::kl_divergence(&qj, &pj).unwrap();
        prop_assert!((log_z - bound - kl).abs() < 1e-9);

        let (_, trace) = mean_field(&m, &Evidence::new(), &MeanFieldOptions { max_sweeps: 30, ..MeanFieldOptions::default() }).unwrap();
        prop_assert_eq!(trace.violations(1e-10), 0);
        prop_assert!(trace.final_elbo() <= log_z + 1e-9);
    }

    #[test]
    fn loopy_bp_is_exact_on_trees(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_tree_mrf(r.gen_range(2..=7), 3, &mut r);
        let ev = random_evidence(&m, &mut r, 1);
        let exact = tree_bp(&m, &ev).unwrap();
        let loopy = loopy_bp(&m, &ev, &LoopyOptions { damping: 1.0, ..LoopyOptions::default() }).unwrap();
        for v in m.variable_names() {
            let a = exact.marginal(v).unwrap().normalize().unwrap().0;
            let b = loopy.marginal(v).unwrap().normalize().unwrap().0;
            prop_assert!(a.max_abs_diff(&b) < 1e-9);
        }
    }
}

fn sampled_dataset(bn: &pgm::BayesianNetwork, n: usize, seed: u64) -> Dataset {
    Dataset::from_samples(&forward_sample(bn, n, &mut RandomSource::new(seed)).unwrap())
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn likelihood_decomposes_and_the_mle_is_optimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let truth = random_bn(4, 3, 0.5, 2, &mut r);
        let d = sampled_dataset(&truth, 300, seed);
        let bn = mle_bn(truth.dag(), &d, 0.0).unwrap();
        let total = bn_log_likelihood(&bn, &d).unwrap();
        let by_family: f64 = truth
            .variable_names()
            .iter()
            .map(|v| family_score(&d, v, &truth.dag().parents(v).unwrap(), ScoreKind::LogLik).unwrap())
            .sum();
        prop_assert!((total - by_family).abs() < 1e-9 * total.abs().max(1.0));

        let v = truth.variable_names()[r.gen_range(0..4)];
        let cpd = bn.cpd(v).unwrap().clone();
        let k = cpd.scope()[0].cardinality();
        let rows = cpd.len() / k;
        let mut rowed = pgm::models::cpd_rows(&cpd);
        let row = r.gen_range(0..rows);
        let (a, b) = (r.gen_range(0..k), r.gen_range(0..k));
        if a != b && rowed[row][a] > 2e-3 {
            rowed[row][a] -= 1e-3;
            rowed[row][b] += 1e-3;
            let parents: Vec<Var> = cpd.scope()[1..].to_vec();
            let perturbed = pgm::models::cpd_from_rows(cpd.scope()[0].clone(), parents, rowed.concat()).unwrap();
            let other = bn.with_cpd(perturbed).unwrap();
            prop_assert!(bn_log_likelihood(&other, &d).unwrap() <= total + 1e-12);
        }
    }

    #[test]
    fn chow_liu_maximizes_total_information(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let truth = random_bn(n, 2, 0.5, 2, &mut r);
        let d = sampled_dataset(&truth, 400, seed);
        let names = truth.variable_names();
        let cl = chow_liu(&d, names[0]).unwrap();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let mi: Vec<f64> = pairs.iter().map(|&(a, b)| mutual_information(&d, names[a], names[b]).unwrap()).collect();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..1 << pairs.len() {
            if mask.count_ones() as usize != n - 1 {
                continue;
            }
            let mut g = UndirectedGraph::new(&names);
            let mut w = 0.0;
            for (k, &(a, b)) in pairs.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    g.add_edge(names[a], names[b]).unwrap();
                    w += mi[k];
                }
            }
            if g.is_connected() {
                best = best.max(w);
            }
        }
        prop_assert!((cl.total_mi - best).abs() < 1e-12);
    }

    #[test]
    fn pc_with_an_oracle_recovers_the_equivalence_class(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let g = random_dag(n, 0.4, &mut r);
        let names: Vec<&str> = g.nodes().iter().map(String::as_str).collect();
        let out = pc(CiSource::Oracle(&g), &names, &PcOptions::default()).unwrap();
        prop_assert_eq!(out.mec_signature(), g.mec_signature());
    }

    #[test]
    fn dirichlet_mean_stays_near_the_frequencies(counts_in in prop::collection::vec(0u64..200, 2..6), alpha in prop::collection::vec(0.01f64..10.0, 6)) {
        let k = counts_in.len();
        let prior = DirichletParams::new(alpha[..k].to_vec()).unwrap();
        let post = dirichlet_posterior(&prior, &counts_in).unwrap();
        let n: u64 = counts_in.iter().sum();
        let s: f64 = prior.alpha().iter().sum();
        let bound = s / (n as f64 + s);
        let mean = post.posterior_mean();
        prop_assert!((mean.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        if n > 0 {
            for (m, c) in mean.iter().zip(&counts_in) {
                prop_assert!((m - *c as f64 / n as f64).abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_network_equals_pseudocount_network(seed in any::<u64>(), alpha in 0.1f64..5.0) {
        let mut r = rng(seed);
        let truth = random_bn(4, 3, 0.5, 2, &mut r);
        let d = sampled_dataset(&truth, 100, seed);
        let a = bayesian_bn(truth.dag(), &d, alpha).unwrap();
        let b = mle_bn(truth.dag(), &d, alpha).unwrap();
        for (x, y) in a.cpds().iter().zip(b.cpds()) {
            prop_assert!(x.max_abs_diff(y) < 1e-12);
        }
        let c = counts(&d, &[truth.variable_names()[0]]).unwrap();
        prop_assert_eq!(c.total(), 100);
    }

    #[test]
    fn gmm_responsibilities_are_distributions(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let data: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 3) as f64 * 4.0 + r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).collect();
        let fit = em_gmm(&data, &GmmOptions { k, restarts: 1, max_iters: 50, ..GmmOptions::default() }, &mut RandomSource::new(seed)).unwrap();
        for row in &fit.responsibilities {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), bayesian in any::<bool>()) {
        let mut r = rng(seed);
        let m = if bayesian {
            Model::Bayesian(random_bn(r.gen_range(1..=6), 4, 0.5, 3, &mut r))
        } else {
            Model::Markov(random_mrf(r.gen_range(1..=6), 4, r.gen_range(1..=5), 3, &mut r))
        };
        let text = serialize_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(back.variables(), m.variables());
        prop_assert_eq!(back.factors(), m.factors());
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn semantically_equal_models_serialize_identically(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mrf(r.gen_range(2..=5), 3, r.gen_range(1..=4), 3, &mut r);
        let a = serialize_model(&Model::Markov(m.clone()));
        let fresh: Vec<Var> =
            m.variables().iter().map(|v| Variable::new(v.name(), v.states().iter().cloned()).unwrap()).collect();
        let rebuilt: Vec<Factor> = m
            .factors()
            .iter()
            .map(|f| {
                let scope = f.names().iter().map(|n| fresh.iter().find(|v| v.name() == *n).unwrap().clone()).collect();
                Factor::new(scope, f.values().to_vec()).unwrap()
            })
            .collect();
        let b = serialize_model(&Model::Markov(MarkovRandomField::new(fresh, rebuilt).unwrap()));
        prop_assert_eq!(&a, &b);
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        let shuffled = serde_json::to_string(&value).unwrap();
        prop_assert_eq!(serialize_model(&parse_model(&shuffled).unwrap()), a);
    }
}

#[test]
fn universe_is_mixed_cardinality() {
    let cards: BTreeSet<usize> = universe().iter().map(|v| v.cardinality()).collect();
    assert_eq!(cards.len(), 2);
}
