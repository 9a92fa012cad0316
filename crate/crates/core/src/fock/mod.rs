//! Truncated bosonic Fock-space algebra.
//!
//! Every mode is truncated to a finite number of levels `dim >= 2`. Multi-mode
//! spaces are ordered with mode 0 as the leftmost tensor factor, i.e. the
//! slowest-varying digit of the flattened basis index.

mod beamsplitter;
mod operator;
mod state;
mod statistics;

pub use beamsplitter::{
    balanced_beamsplitter, beamsplitter_map, beamsplitter_matrix, BeamsplitterOutput,
};
pub use operator::{
    create, destroy, digits, embed, embed_pair, flat_index, identity, normal_power, number, tensor,
    Operator,
};
pub use state::{coherent_state, QuantumState, StateRepr};
pub use statistics::{photon_statistics, PhotonStatistics};
