//! Independent reference methods used to check the impedance solvers.
//!
//! Nothing here calls into the impedance kernels; only the shared model
//! types and the trajectory container are used.

mod transfer;
mod wavefunction;
mod well;

pub use transfer::{
    layer_matrix, transfer_matrix_solve, transfer_matrix_solve_side, TransferCoefficients, TransferMatrix,
};
pub use wavefunction::{reconstruct_wavefunction, schrodinger_residual, Normalization, WavefunctionProfile};
pub use well::{square_well_eigenvalues, square_well_states, WellEigenstate};
