//! Discrete probabilistic graphical models.

pub mod cli;
pub mod error;
pub mod exact;
pub mod factor;
pub mod graph;
pub mod io;
pub mod learning;
pub mod map;
pub mod models;
pub mod networks;
pub mod random;
pub mod sampling;
pub mod variational;

pub use error::{Error, Result};
pub use factor::{Domain, Evidence, Semiring, Var, Variable};
pub use graph::{DirectedGraph, UndirectedGraph};
pub use models::{BayesianNetwork, FactorModel, MarkovRandomField, Model};

/// Double-precision factor, the default everywhere.
pub type Factor = factor::Factor<f64>;
/// Single-precision factor.
pub type Factor32 = factor::Factor<f32>;
/// Exact rational factor, for enumeration and elimination without rounding.
pub type RationalFactor = factor::Factor<num_rational::Ratio<i128>>;
