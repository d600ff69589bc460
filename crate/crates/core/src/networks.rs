//! Small textbook networks used in examples, fixtures and tests.

use crate::error::Result;
use crate::factor::{Var, Variable};
use crate::models::{BayesianNetwork, MarkovRandomField};
use crate::Factor;

/// Student network: difficulty and intelligence drive the grade, which drives
/// the recommendation letter; intelligence also drives the SAT score.
pub fn student() -> BayesianNetwork {
    BayesianNetwork::from_tables(
        &[
            ("DIFFICULTY", &["d0", "d1"]),
            ("INTELLIGENCE", &["i0", "i1"]),
            ("GRADE", &["g1", "g2", "g3"]),
            ("SAT", &["s0", "s1"]),
            ("LETTER", &["l0", "l1"]),
        ],
        &[
            ("DIFFICULTY", &[], vec![0.6, 0.4]),
            ("INTELLIGENCE", &[], vec![0.7, 0.3]),
            (
                "GRADE",
                &["INTELLIGENCE", "DIFFICULTY"],
                vec![0.3, 0.4, 0.3, 0.05, 0.25, 0.7, 0.9, 0.08, 0.02, 0.5, 0.3, 0.2],
            ),
            ("SAT", &["INTELLIGENCE"], vec![0.95, 0.05, 0.2, 0.8]),
            ("LETTER", &["GRADE"], vec![0.1, 0.9, 0.4, 0.6, 0.99, 0.01]),
        ],
    )
    .expect("student network is well formed")
}

/// Burglary and earthquake both trigger the alarm.
pub fn earthquake() -> BayesianNetwork {
    BayesianNetwork::from_tables(
        &[("Burglary", &["0", "1"]), ("Earthquake", &["0", "1"]), ("Alarm", &["0", "1"])],
        &[
            ("Burglary", &[], vec![0.99, 0.01]),
            ("Earthquake", &[], vec![0.98, 0.02]),
            ("Alarm", &["Burglary", "Earthquake"], vec![0.999, 0.001, 0.71, 0.29, 0.06, 0.94, 0.05, 0.95]),
        ],
    )
    .expect("earthquake network is well formed")
}

/// Chest-clinic network.
pub fn asia() -> BayesianNetwork {
    let yn: &[&str] = &["yes", "no"];
    BayesianNetwork::from_tables(
        &[
            ("asia", yn),
            ("tub", yn),
            ("smoke", yn),
            ("lung", yn),
            ("bronc", yn),
            ("either", yn),
            ("xray", yn),
            ("dysp", yn),
        ],
        &[
            ("asia", &[], vec![0.01, 0.99]),
            ("tub", &["asia"], vec![0.05, 0.95, 0.01, 0.99]),
            ("smoke", &[], vec![0.5, 0.5]),
            ("lung", &["smoke"], vec![0.1, 0.9, 0.01, 0.99]),
            ("bronc", &["smoke"], vec![0.6, 0.4, 0.3, 0.7]),
            ("either", &["lung", "tub"], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
            ("xray", &["either"], vec![0.98, 0.02, 0.05, 0.95]),
            ("dysp", &["bronc", "either"], vec![0.9, 0.1, 0.8, 0.2, 0.7, 0.3, 0.1, 0.9]),
        ],
    )
    .expect("asia network is well formed")
}

/// Four voters on a cycle; agreeing neighbours score 10 (both 1) or 5 (both 0), else 1.
pub fn voting() -> MarkovRandomField {
    let vars: Vec<Var> = ["A", "B", "C", "D"].iter().map(|n| Variable::new(*n, ["0", "1"]).unwrap()).collect();
    let pair = |i: usize, j: usize| Factor::new(vec![vars[i].clone(), vars[j].clone()], vec![5.0, 1.0, 1.0, 10.0]);
    let factors = [(0, 1), (1, 2), (2, 3), (3, 0)].iter().map(|&(i, j)| pair(i, j)).collect::<Result<Vec<_>>>();
    MarkovRandomField::new(vars.clone(), factors.unwrap()).expect("voting model is well formed")
}

/// Collider A -> C <- B with C -> D, the structure used to illustrate PC.
pub fn y_structure() -> BayesianNetwork {
    BayesianNetwork::from_tables(
        &[("A", &["0", "1"]), ("B", &["0", "1"]), ("C", &["0", "1"]), ("D", &["0", "1"])],
        &[
            ("A", &[], vec![0.5, 0.5]),
            ("B", &[], vec![0.4, 0.6]),
            ("C", &["A", "B"], vec![0.9, 0.1, 0.3, 0.7, 0.25, 0.75, 0.05, 0.95]),
            ("D", &["C"], vec![0.8, 0.2, 0.15, 0.85]),
        ],
    )
    .expect("y-structure network is well formed")
}

/// A single biased coin.
pub fn coin(p_heads: f64) -> BayesianNetwork {
    BayesianNetwork::from_tables(&[("coin", &["heads", "tails"])], &[("coin", &[], vec![p_heads, 1.0 - p_heads])])
        .expect("coin is well formed")
}
