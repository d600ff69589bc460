use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::{Var, Variable};
use crate::learning::Dataset;

/// Name of an optional per-row weight column; it is skipped on load.
pub const WEIGHT_COLUMN: &str = "weight";

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn csv_err(e: csv::Error) -> Error {
    let (row, col) = match e.position() {
        Some(p) => (p.line() as usize, 0),
        None => (0, 0),
    };
    Error::Dataset { row, col, message: e.to_string() }
}

fn header(r: &mut csv::Reader<&[u8]>) -> Result<Vec<String>> {
    let h: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    for (j, name) in h.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Dataset { row: 1, col: j + 1, message: "empty column name".into() });
        }
        if h[..j].contains(name) {
            return Err(Error::Dataset { row: 1, col: j + 1, message: format!("duplicate column `{name}`") });
        }
    }
    Ok(h)
}

/// Load a categorical dataset whose header names a subset of `variables`.
///
/// Cells are state labels. Rows and columns in errors are 1-based positions in
/// the file, with the header on row 1.
pub fn load_dataset(text: &str, variables: &[Var]) -> Result<Dataset> {
    let mut r = reader(text);
    let names = header(&mut r)?;
    let mut cols: Vec<(usize, Var)> = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if name == WEIGHT_COLUMN && j + 1 == names.len() {
            continue;
        }
        let v = variables
            .iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::Dataset { row: 1, col: j + 1, message: format!("unknown variable `{name}`") })?;
        cols.push((j, v.clone()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let row = cols
            .iter()
            .map(|(j, v)| {
                let cell = rec.get(*j).unwrap_or_default();
                v.state_index(cell).map_err(|_| Error::Dataset {
                    row: line,
                    col: j + 1,
                    message: format!("`{cell}` is not a state of `{}`", v.name()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Dataset::new(cols.into_iter().map(|(_, v)| v).collect(), rows)
}

/// Variables inferred from a CSV: one per column, states are the distinct
/// labels, ordered numerically when every label is an integer.
pub fn infer_schema(text: &str) -> Result<Vec<Var>> {
    let mut r = reader(text);
    let mut names = header(&mut r)?;
    if names.last().map(String::as_str) == Some(WEIGHT_COLUMN) {
        names.pop();
    }
    let mut seen: Vec<BTreeSet<String>> = vec![BTreeSet::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        for (j, s) in seen.iter_mut().enumerate() {
            s.insert(rec.get(j).unwrap_or_default().to_string());
        }
    }
    names
        .into_iter()
        .zip(seen)
        .map(|(name, labels)| {
            let mut labels: Vec<String> = labels.into_iter().collect();
            if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
                labels.sort_by_key(|l| l.parse::<i64>().expect("checked"));
            }
            if labels.len() < 2 {
                log::warn!("column `{name}` has fewer than two distinct values; padding with a placeholder state");
                while labels.len() < 2 {
                    labels.push(format!("__unseen{}", labels.len()));
                }
            }
            Variable::new(name, labels)
        })
        .collect()
}

/// Real-valued CSV with a header row. Returns column names and rows.
pub fn load_real_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = reader(text);
    let names = header(&mut r)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Dataset {
                    row: i + 2,
                    col: j + 1,
                    message: format!("`{cell}` is not a finite number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

/// Dataset as CSV with state labels.
pub fn write_dataset_csv<W: std::io::Write>(d: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(d.names()).map_err(|e| Error::Io(e.to_string()))?;
    for row in d.rows() {
        let labels: Vec<&str> =
            row.iter().zip(d.variables()).map(|(&s, v)| v.state_label(s).expect("validated")).collect();
        w.write_record(labels).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
