use crate::error::{Error, Result};
use crate::models::FactorModel;

/// A pairwise model in log space: `θ_i(x_i)` per variable and one merged `θ_ij`
/// table per connected pair (i < j, row-major with `x_i` slowest).
#[derive(Debug, Clone)]
pub(crate) struct PairwiseForm {
    pub names: Vec<String>,
    pub cards: Vec<usize>,
    pub unary: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize, Vec<f64>)>,
    pub constant: f64,
}

impl PairwiseForm {
    pub fn from_model<M: FactorModel + ?Sized>(model: &M) -> Result<Self> {
        let names: Vec<String> = model.variables().iter().map(|v| v.name().to_string()).collect();
        let cards: Vec<usize> = model.variables().iter().map(|v| v.cardinality()).collect();
        let mut unary: Vec<Vec<f64>> = cards.iter().map(|&k| vec![0.0; k]).collect();
        let mut edges: Vec<(usize, usize, Vec<f64>)> = Vec::new();
        let mut constant = 0.0;
        for (f, sc) in model.factors().iter().zip(model.scope_indices()) {
            match sc.len() {
                0 => constant += f.values()[0].ln(),
                1 => {
                    for (u, &v) in unary[sc[0]].iter_mut().zip(f.values()) {
                        *u += v.ln();
                    }
                }
                2 => {
                    let (i, j) = (sc[0].min(sc[1]), sc[0].max(sc[1]));
                    let (ki, kj) = (cards[i], cards[j]);
                    let pos = match edges.iter().position(|e| e.0 == i && e.1 == j) {
                        Some(p) => p,
                        None => {
                            edges.push((i, j, vec![0.0; ki * kj]));
                            edges.len() - 1
                        }
                    };
                    let table = &mut edges[pos].2;
                    for a in 0..ki {
                        for b in 0..kj {
                            let idx = if sc[0] == i { a * kj + b } else { b * ki + a };
                            table[a * kj + b] += f.values()[idx].ln();
                        }
                    }
                }
                k => return Err(Error::Unsupported(format!("factor of arity {k} in a pairwise routine"))),
            }
        }
        edges.sort_by_key(|e| (e.0, e.1));
        Ok(PairwiseForm { names, cards, unary, edges, constant })
    }

    pub fn score(&self, x: &[usize]) -> f64 {
        let mut s = self.constant;
        for (u, &xi) in self.unary.iter().zip(x) {
            s += u[xi];
        }
        for (i, j, t) in &self.edges {
            s += t[x[*i] * self.cards[*j] + x[*j]];
        }
        s
    }
}
