//! Exact MAP by graph cuts and approximate MAP by relaxation and search.

mod dual;
mod energy;
mod flow;
mod ilp;
mod pairwise;
mod search;

pub use dual::{dual_decomposition, DualOptions, DualResult, DualState};
pub use energy::{graphcut_map, normalize_energies, PairwiseEnergyModel};
pub use flow::{min_cut, FlowNetwork, MinCut};
pub use ilp::export_map_ilp;
pub use search::{local_search_from, local_search_map, simulated_annealing_map, AnnealingSchedule};
