//! Finite-sample identification of partially observed LTI systems from
//! multiple independent rollouts.
//!
//! The pipeline: simulate rollouts of `x⁺ = Ax + Bu + B_w w`,
//! `y = Cx + Du + D_v v`; estimate the Markov parameters
//! `G = [D, CB, …, CA^{T−2}B]` by least squares; recover `(A, B, C, D)` up to
//! similarity with Ho-Kalman; compare the error against closed-form
//! high-probability bounds.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod lti;
pub mod numerics;
pub mod realization;
pub mod rng;
pub mod serde_matrix;

pub use error::{Result, SysIdError};
pub use estimators::{assemble_data_matrices, ols_final_sample, ols_full, ols_unequal_length, Method};
pub use lti::{simulate_dataset, true_markov, MarkovMatrix, NoiseConfig, RolloutDataset, SystemModel};
pub use numerics::Matrix;
pub use realization::{ho_kalman, Realization};
