//! Exact and Monte Carlo simulation of quantum energy teleportation on a
//! two-qubit model and on star graphs cut from `{3,q}` triangular tilings,
//! with a teleportation relay for long-range transfer.
//!
//! Conventions used throughout:
//!
//! * qubit `q` is bit `q` of an amplitude index, so qubit 0 is the least
//!   significant bit; kets and Pauli words are written qubit 0 first
//!   (`"XZ"` is `X` on qubit 0 and `Z` on qubit 1);
//! * the sender sits on qubit 0 and measures `X_0`; receiver `j` applies
//!   `cos θ - i μ sin θ Y_j` conditioned on the sender's outcome `μ`;
//! * every Hamiltonian term carries a constant offset making its ground
//!   expectation zero, so all reported energies are relative to the ground.

pub mod dense;
pub mod error;
pub mod model;
pub mod pauli;
pub mod protocol;
pub mod sampler;
pub mod state;
pub mod table;
pub mod teleport;
pub mod tiling;

pub use dense::{solve_ground, GroundSolution};
pub use error::{QetError, Result};
pub use model::{
    analytic_ground_minimal, build_minimal, build_star, build_star_with_ground, compute_theta,
    FeedbackAngle, LocalTerm, MinimalModelParams, ModelBundle, ModelParams, StarConvention,
    StarModelParams,
};
pub use pauli::{heisenberg_derivative, ObservableSum, Pauli, PauliString};
pub use protocol::{
    alice_measure, apply_feedback, receiver_energy, run_minimal_qet, run_protocol, run_qed,
    sweep_eb, Method, ProtocolAxes, QetRecord, ReceiverEnergy, ReceiverRecord, SweepGrid,
};
pub use sampler::{
    estimate, sample_protocol, sample_with_feedback, sampled_record, Basis, EstimateRow, ShotPlan,
    Tallies,
};
pub use state::{Branch, Ensemble, Expectation, StateVector};
pub use table::{estimate_table1, paper_table1, Observable, TableConfig, TableRow};
pub use teleport::{run_longrange_qet, LoccTranscript, RelayPlan};
pub use tiling::{generate, ring_sizes, unit_star, TilingGraph, TilingSpec};
