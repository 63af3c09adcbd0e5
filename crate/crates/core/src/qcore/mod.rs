//! Dense complex-matrix quantum objects for small systems: states,
//! measurements, operations, entropies.

mod bell;
mod ops;
mod povm;
pub mod random;
mod range;
mod state;

pub use bell::{bell_diagonal_state, bell_povm, bell_vectors, bell_weights};
pub use ops::{
    apply_operation, condition_on_outcome, condition_on_outcome_with_prob, disturbance_bound, measure, q_entropy,
    schur_check, steer_to_distribution, steering_operation, trace_distance, OUTCOME_FLOOR,
};
pub use povm::{pauli_matrices, Povm, QuantumOperation};
pub use range::{BellSymmetry, DensityRangeSpec};
pub use state::{CMat, CVec, DensityOperator, MAX_DIM, OPERATOR_TOL, RANK_TOL};

pub(crate) use state::{c, hermitian_eigenvalues};
