use super::flow::FlowNetwork;
use crate::error::{Error, Result};
use crate::factor::{Var, Variable};
use crate::models::{FactorModel, MarkovRandomField};
use crate::Factor;

/// Binary pairwise energy: unary `E_u(x_u)` plus `λ_uv [x_u ≠ x_v]` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEnergyModel {
    names: Vec<String>,
    unary: Vec<[f64; 2]>,
    edges: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl PairwiseEnergyModel {
    pub fn new(names: Vec<String>, unary: Vec<[f64; 2]>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if names.len() != unary.len() {
            return Err(Error::Shape(format!("{} names for {} unary tables", names.len(), unary.len())));
        }
        for (n, u) in names.iter().zip(&unary) {
            if !u.iter().all(|e| e.is_finite()) {
                return Err(Error::InvalidModel(format!("unary energy of `{n}` is not finite")));
            }
        }
        for &(a, b, l) in &edges {
            if a >= names.len() || b >= names.len() || a == b {
                return Err(Error::InvalidModel(format!("edge ({a}, {b}) is not between two distinct nodes")));
            }
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "edge {}-{} has weight {l}; pairwise costs must be finite and nonnegative",
                    names[a], names[b]
                )));
            }
        }
        Ok(PairwiseEnergyModel { names, unary, edges, offset: 0.0 })
    }

    /// Energy form of a binary pairwise model with submodular pairwise factors.
    ///
    /// Every 2×2 table `E` decomposes as a constant plus unaries plus
    /// `λ [a ≠ b]` with `λ = (E01 + E10 − E00 − E11) / 2`; negative `λ` is
    /// unsupported.
    pub fn from_mrf<M: FactorModel + ?Sized>(model: &M) -> Result<Self> {
        let vars = model.variables();
        for v in vars {
            if v.cardinality() != 2 {
                return Err(Error::Unsupported(format!("`{}` is not binary", v.name())));
            }
        }
        let n = vars.len();
        let mut unary = vec![[0.0f64; 2]; n];
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut offset = 0.0;
        let energy = |p: f64, what: &str| -> Result<f64> {
            if p > 0.0 && p.is_finite() {
                Ok(-p.ln())
            } else {
                Err(Error::InvalidModel(format!("{what} has a zero or non-finite entry")))
            }
        };
        for (f, sc) in model.factors().iter().zip(model.scope_indices()) {
            let e: Vec<f64> = f.values().iter().map(|&p| energy(p, &format!("{f:?}"))).collect::<Result<_>>()?;
            match sc.len() {
                0 => offset += e[0],
                1 => {
                    unary[sc[0]][0] += e[0];
                    unary[sc[0]][1] += e[1];
                }
                2 => {
                    let (a, b) = (sc[0], sc[1]);
                    let (e00, e01, e10, e11) = (e[0], e[1], e[2], e[3]);
                    let lambda = (e01 + e10 - e00 - e11) / 2.0;
                    if lambda < -1e-12 {
                        return Err(Error::Unsupported(format!("pairwise factor {f:?} is not submodular")));
                    }
                    offset += e00;
                    unary[a][1] += e10 - e00 - lambda;
                    unary[b][1] += e01 - e00 - lambda;
                    let (i, j) = (a.min(b), a.max(b));
                    match edges.iter_mut().find(|x| x.0 == i && x.1 == j) {
                        Some(x) => x.2 += lambda.max(0.0),
                        None => edges.push((i, j, lambda.max(0.0))),
                    }
                }
                k => return Err(Error::Unsupported(format!("factor of arity {k}"))),
            }
        }
        let mut m = PairwiseEnergyModel::new(vars.iter().map(|v| v.name().to_string()).collect(), unary, edges)?;
        m.offset = offset;
        Ok(m)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn unary(&self) -> &[[f64; 2]] {
        &self.unary
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Constant added to every labeling's energy.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn energy(&self, x: &[usize]) -> f64 {
        let mut e = self.offset;
        for (u, &xi) in self.unary.iter().zip(x) {
            e += u[xi];
        }
        for &(a, b, l) in &self.edges {
            if x[a] != x[b] {
                e += l;
            }
        }
        e
    }

    /// Markov random field with factors `exp(−E)`.
    pub fn to_mrf(&self) -> Result<MarkovRandomField> {
        let vars: Vec<Var> = self.names.iter().map(|n| Variable::new(n.as_str(), ["0", "1"])).collect::<Result<_>>()?;
        let mut factors = Vec::new();
        for (v, u) in vars.iter().zip(&self.unary) {
            factors.push(Factor::new(vec![v.clone()], vec![(-u[0]).exp(), (-u[1]).exp()])?);
        }
        for &(a, b, l) in &self.edges {
            let m = (-l).exp();
            factors.push(Factor::new(vec![vars[a].clone(), vars[b].clone()], vec![1.0, m, m, 1.0])?);
        }
        if self.offset != 0.0 {
            factors.push(Factor::new(vec![], vec![(-self.offset).exp()])?);
        }
        MarkovRandomField::new(vars, factors)
    }
}

/// Shift each unary table so that its minimum is zero.
///
/// The removed minima move into the constant offset, so every labeling keeps
/// its total energy.
pub fn normalize_energies(m: &PairwiseEnergyModel) -> PairwiseEnergyModel {
    let mut out = m.clone();
    for u in &mut out.unary {
        let lo = u[0].min(u[1]);
        u[0] -= lo;
        u[1] -= lo;
        out.offset += lo;
    }
    out
}

/// Exact minimum-energy labeling by a single s-t min cut.
///
/// Source side means label 0. Returns the labeling and its total energy.
pub fn graphcut_map(m: &PairwiseEnergyModel) -> Result<(Vec<usize>, f64)> {
    let m = normalize_energies(m);
    let n = m.names.len();
    let mut nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    nodes.push("s".into());
    nodes.push("t".into());
    let (s, t) = (n, n + 1);
    let mut g = FlowNetwork::new(&nodes, "s", "t")?;
    for (u, e) in m.unary.iter().enumerate() {
        if e[0] == 0.0 {
            g.add_arc_idx(s, u, e[1])?;
        } else {
            g.add_arc_idx(u, t, e[0])?;
        }
    }
    for &(a, b, l) in &m.edges {
        g.add_arc_idx(a, b, l)?;
        g.add_arc_idx(b, a, l)?;
    }
    let (_, side) = g.min_cut_idx()?;
    let x: Vec<usize> = (0..n).map(|u| usize::from(!side[u])).collect();
    let e = m.energy(&x);
    Ok((x, e))
}
