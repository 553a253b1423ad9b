use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SysIdError};
use crate::lti::{true_markov, MarkovMatrix, SystemModel};
use crate::numerics::{spectral_norm_complex, spectral_norm_unchecked, spectral_radius};

pub const TAIL_TOLERANCE: f64 = 1e-12;
pub const MAX_TAIL_TERMS: usize = 1_000_000;
/// Default grid density per Markov block.
pub const GRID_FACTOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirTruncationReport {
    pub ols_error_hinf: f64,
    pub tail_bound: f64,
    pub total_bound: f64,
    pub grid_points: usize,
}

/// `max_ω σ_max(Σ_k E_k e^{−jωk})` over `ω = 2πi/grid_points`.
pub fn fir_hinf_grid(err: &MarkovMatrix, grid_points: usize) -> f64 {
    let (p, m, horizon) = (err.rows(), err.block_width(), err.horizon());
    (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let omega = 2.0 * PI * i as f64 / grid_points as f64;
            let mut resp = nalgebra::DMatrix::<Complex64>::zeros(p, m);
            for k in 0..horizon {
                let phase = Complex64::from_polar(1.0, -omega * k as f64);
                resp += err.block(k).map(|x| Complex64::new(x, 0.0)) * phase;
            }
            spectral_norm_complex(&resp)
        })
        .reduce(|| 0.0, f64::max)
}

/// `Σ_{k≥T} ‖C·A^{k−1}·B‖`, stopping once a bound on the next term drops
/// below [`TAIL_TOLERANCE`].
pub fn fir_tail_bound(sys: &SystemModel, horizon: usize) -> Result<f64> {
    let rho = spectral_radius(sys.a())?;
    if rho >= 1.0 {
        return Err(SysIdError::Unstable { rho });
    }
    let b_norm = sys.b().norm();
    // C·A^{T−1}
    let mut ca = sys.c().clone();
    for _ in 1..horizon {
        ca = &ca * sys.a();
    }
    let mut sum = 0.0;
    for _ in 0..MAX_TAIL_TERMS {
        if ca.norm() * b_norm < TAIL_TOLERANCE {
            return Ok(sum);
        }
        sum += spectral_norm_unchecked(&(&ca * sys.b()));
        ca = &ca * sys.a();
    }
    Err(SysIdError::Convergence { terms: MAX_TAIL_TERMS })
}

/// H∞ error split between the estimated FIR model and the true (infinite)
/// impulse response.
pub fn fir_hinf_report(
    truth: &SystemModel,
    g_hat: &MarkovMatrix,
    grid_points: usize,
) -> Result<FirTruncationReport> {
    let horizon = g_hat.horizon();
    if grid_points < GRID_FACTOR * horizon {
        return Err(SysIdError::InvalidInput(format!(
            "grid needs at least {} points for horizon {horizon}, got {grid_points}",
            GRID_FACTOR * horizon
        )));
    }
    if truth.p() != g_hat.rows() || truth.m() != g_hat.block_width() {
        return Err(SysIdError::DimensionMismatch(
            "estimate does not match the system dimensions".into(),
        ));
    }
    let tail_bound = fir_tail_bound(truth, horizon)?;
    let g = true_markov(truth, horizon)?;
    let err = MarkovMatrix::new(g.block_row() - g_hat.block_row(), g.block_width())?;
    let ols_error_hinf = fir_hinf_grid(&err, grid_points);
    Ok(FirTruncationReport {
        ols_error_hinf,
        tail_bound,
        total_bound: ols_error_hinf + tail_bound,
        grid_points,
    })
}
