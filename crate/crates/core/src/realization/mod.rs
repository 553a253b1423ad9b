//! Ho-Kalman realization, its perturbation diagnostics, and the FIR/H∞ split
//! used to pick the Markov horizon.

pub mod fir;
pub mod ho_kalman;
pub mod robustness;

pub use fir::{fir_hinf_grid, fir_hinf_report, fir_tail_bound, FirTruncationReport, GRID_FACTOR};
pub use ho_kalman::{ho_kalman, hankel_perturbation_bound, Realization, ORDER_GAP_RATIO};
pub use robustness::{realization_robustness_check, RobustnessReport};
