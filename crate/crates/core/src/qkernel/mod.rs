//! States over named registers and the distance and information measures on them.

pub mod classical;
pub mod layout;
pub mod linalg;
pub mod measures;
pub mod state;
pub mod tolerances;

pub use classical::{
    classical_bures, classical_bures_sq, classical_fidelity, classical_trace_distance,
    ClassicalDistribution, JointTable,
};
pub use layout::{Register, RegisterLayout};
pub use linalg::CMatrix;
pub use measures::{
    bures, bures_matrices, conditional_mutual_information, fidelity, fidelity_matrices,
    mutual_information, subsystem_entropy, trace_distance, trace_distance_matrices, trace_norm,
    von_neumann_entropy, InfoCalculator,
};
pub use state::{partial_trace, DensityMatrix, PureState, QuantumState, MAX_REDUCED_QUBITS};
pub use tolerances::Tolerances;
