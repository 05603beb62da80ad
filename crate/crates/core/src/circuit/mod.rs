//! Circuit representation, gate library and the exact statevector oracle.

mod clifford;
mod counts;
mod gates;
mod ir;
mod midcircuit;
mod noise;
mod statevector;

pub use clifford::{verify_clifford_table, TableRowReport};
pub use counts::{
    check_bits, sample_distribution, sample_with, total_variation, BitOrder, CountsTable,
    Distribution,
};
pub use gates::{
    equal_up_to_phase, gate_matrix, hadamard, identity, kron, max_abs_diff, op_matrix, pauli_x,
    pauli_y, pauli_z, phase_distance, projector_one, projector_zero, rotation, state_vector,
    to_array2, to_array4, unitarity_error, CMatrix,
};
pub use ir::{Circuit, GateKind, GateOp, StateLabel};
pub use midcircuit::{
    analytic_distribution, analytic_distribution_from, simulate_with_midcircuit, BranchState,
    SimMode, SimOutput, MAX_MIDCIRCUIT_BRANCH_OPS,
};
pub use noise::{apply_depolarizing_noise, sample_noisy_counts, Trajectory};
pub use statevector::{
    bits_of_index, index_of_bits, simulate_statevector, simulate_statevector_capped, StateVector,
    DEFAULT_QUBIT_CAP,
};
