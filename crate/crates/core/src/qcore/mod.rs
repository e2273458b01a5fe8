//! Dense complex linear algebra and quantum-state primitives.

mod linalg;
mod matrix;
pub mod random;
mod state;

pub(crate) use linalg::herm_eig_unchecked;
pub use linalg::{
    eigenvalues, exp_divided_difference, herm_eig, mat_exp_herm, mat_exp_i_herm, mat_log_psd,
    mat_sqrt_psd, spectral_norm, HermitianEigen, HERMITIAN_TOL, LOG_FLOOR,
};
pub use matrix::{
    cost_matrix, kron, kron_vec, partial_trace_op, qubit_count, swap_operator, Complex,
    ComplexMatrix, Subsystem,
};
pub(crate) use matrix::{I, ONE, ZERO};
pub use state::{
    as_pure, fidelity, fidelity_pure, partial_trace, trace_distance, DensityMatrix, PureState,
    DENSITY_EIGEN_TOL, DENSITY_HERMITIAN_TOL, DENSITY_TRACE_TOL, PURE_NORM_TOL,
};
