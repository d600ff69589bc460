//! Directed and undirected graphs and the structural operations on them.

mod directed;
mod undirected;

pub use directed::{DirectedGraph, MecSignature};
pub use undirected::{max_cliques, SpanningTree, UndirectedGraph};

/// Quote a DOT identifier.
pub(crate) fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
