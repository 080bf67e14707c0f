//! Global entanglement Q of pure qudit states, resolved by symmetry.
//!
//! For a pure state of `n` distinguishable `d`-level particles and a locally
//! acting symmetry described by an ordered partition of `d` into charge-sector
//! dimensions, this crate computes:
//!
//! - the global entanglement Q (Meyer-Wallach measure) by three independent
//!   routes: the original wedge-product form for qubits, the scaled average
//!   single-site linear entropy for any `d`, and the sum of its
//!   symmetry-resolved parts;
//! - the sector contributions `Q_a` and inter-sector interference
//!   contributions `Q_ab`, which satisfy `Q = sum_a Q_a + sum_{a<b} Q_ab`;
//! - closed-form Haar-ensemble averages of every term, including the
//!   finite-size correction factor, for validating ensemble statistics;
//! - an exact simulation of the ancilla-based measurement protocol that
//!   reconstructs the interference terms, with optional binomial shot noise.
//!
//! [`sweep`] drives seeded, reproducible ensembles over `(n, d, partition)`
//! grids and emits CSV; [`validate`] re-checks every library invariant at
//! runtime.

pub mod circuit;
pub mod entanglement;
pub mod error;
pub mod haar;
pub mod linalg;
pub mod states;
pub mod sweep;
pub mod symmetry;
pub mod validate;

pub use circuit::{
    reconstruct_q_interference, run_interference_circuit, CircuitOutcome,
    InterferenceReconstruction,
};
pub use entanglement::{
    decompose, iota, projected_q, q_linear_entropy, q_wedge, wedge_distance, QDecomposition,
};
pub use error::{Result, SrqError};
pub use haar::{
    correction_factor, expected_q_interference, expected_q_sector, expected_q_total, HaarPrediction,
};
pub use linalg::{f2, kron, partial_trace_single_site, swap_operator, ComplexMatrix};
pub use states::{haar_random, named_state, NamedState, PureState};
pub use symmetry::{projectors, ChargePartition, ProjectorFamily, SectorSpec};
