//! Model documents, CSV datasets and DOT output.
//!
//! A model document is JSON:
//!
//! ```json
//! {
//!   "factors": [
//!     {"child": "A", "domain": "linear", "kind": "cpd", "scope": ["A"], "table": [0.4, 0.6]}
//!   ],
//!   "format_version": 1,
//!   "model_type": "bayesian_network",
//!   "variables": [{"name": "A", "states": ["a0", "a1"]}]
//! }
//! ```
//!
//! Tables are flat with the first scope variable slowest-varying; a cpd lists
//! its child first. Log-domain tables are converted to linear on load.

mod data;
mod model;

pub use data::{infer_schema, load_dataset, load_real_csv, write_dataset_csv, WEIGHT_COLUMN};
pub use model::{format_float, parse_model, serialize_model, to_canonical_json, FORMAT_VERSION};

use std::path::Path;

use crate::error::{Error, Result};
use crate::models::Model;

/// Read and parse a model document from disk.
pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

/// Write DOT text to `path`.
pub fn export_dot(dot: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, dot).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
