//! Toeplitz data matrices and the least-squares Markov-parameter estimators.

pub mod data_matrices;
pub mod decomposition;
pub mod export;
pub mod ols;

pub use data_matrices::{assemble_data_matrices, kron_identity, toeplitz_block, DataMatrices};
pub use decomposition::error_decomposition_check;
pub use export::{read_estimate, write_estimate, EstimateSidecar};
pub use ols::{ols_final_sample, ols_full, ols_unequal_length, EstimationResult, Method};
