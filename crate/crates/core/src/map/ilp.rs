use std::fmt::Write;

use super::pairwise::PairwiseForm;
use crate::error::Result;
use crate::models::FactorModel;

fn term(out: &mut String, coef: f64, var: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {var}", -coef);
    } else {
        let _ = write!(out, " + {coef} {var}");
    }
}

/// MAP as an integer linear program in LP file format.
///
/// Indicator `mu_i_s` means variable `i` takes state `s`; `mu_i_j_s_t` covers
/// a connected pair `i < j`. Indices refer to model variable order. Zero
/// factor entries become indicators fixed at 0.
pub fn export_map_ilp<M: FactorModel + ?Sized>(model: &M) -> Result<String> {
    let form = PairwiseForm::from_model(model)?;
    let mut out = String::new();
    out.push_str("\\ MAP assignment as an integer linear program over indicator variables.\n");
    out.push_str("\\ LP relaxation: replace Binary with 0 <= mu <= 1, solve, then round the LP solution.\n");
    for (i, n) in form.names.iter().enumerate() {
        let _ = writeln!(out, "\\ variable {i} = {n}");
    }
    if form.constant != 0.0 {
        let _ = writeln!(out, "\\ objective constant {}", form.constant);
    }
    let mut fixed = Vec::new();
    let mut all = Vec::new();
    out.push_str("Maximize\n obj:");
    let mut any = false;
    for (i, u) in form.unary.iter().enumerate() {
        for (s, &c) in u.iter().enumerate() {
            let v = format!("mu_{i}_{s}");
            if c == f64::NEG_INFINITY {
                fixed.push(v.clone());
                term(&mut out, 0.0, &v);
            } else {
                term(&mut out, c, &v);
            }
            any = true;
            all.push(v);
        }
    }
    for (i, j, t) in &form.edges {
        let kj = form.cards[*j];
        for (k, &c) in t.iter().enumerate() {
            let v = format!("mu_{i}_{j}_{}_{}", k / kj, k % kj);
            if c == f64::NEG_INFINITY {
                fixed.push(v.clone());
                term(&mut out, 0.0, &v);
            } else {
                term(&mut out, c, &v);
            }
            all.push(v);
        }
    }
    if !any {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, &k) in form.cards.iter().enumerate() {
        let _ = write!(out, " norm_{i}:");
        for s in 0..k {
            term(&mut out, 1.0, &format!("mu_{i}_{s}"));
        }
        out.push_str(" = 1\n");
    }
    for (i, j, _) in &form.edges {
        let _ = write!(out, " norm_{i}_{j}:");
        for s in 0..form.cards[*i] {
            for t in 0..form.cards[*j] {
                term(&mut out, 1.0, &format!("mu_{i}_{j}_{s}_{t}"));
            }
        }
        out.push_str(" = 1\n");
    }
    for (i, j, _) in &form.edges {
        let (ki, kj) = (form.cards[*i], form.cards[*j]);
        for s in 0..ki {
            let _ = write!(out, " cons_{i}_{j}_{i}_{s}:");
            for t in 0..kj {
                term(&mut out, 1.0, &format!("mu_{i}_{j}_{s}_{t}"));
            }
            let _ = writeln!(out, " - 1 mu_{i}_{s} = 0");
        }
        for t in 0..kj {
            let _ = write!(out, " cons_{i}_{j}_{j}_{t}:");
            for s in 0..ki {
                term(&mut out, 1.0, &format!("mu_{i}_{j}_{s}_{t}"));
            }
            let _ = writeln!(out, " - 1 mu_{j}_{t} = 0");
        }
    }
    out.push_str("Bounds\n");
    for v in &all {
        if fixed.contains(v) {
            let _ = writeln!(out, " {v} = 0");
        } else {
            let _ = writeln!(out, " 0 <= {v} <= 1");
        }
    }
    out.push_str("Binary\n");
    for v in &all {
        let _ = writeln!(out, " {v}");
    }
    out.push_str("End\n");
    Ok(out)
}
