use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::data_matrices::DataMatrices;
use crate::error::{Result, SysIdError};
use crate::lti::{MarkovMatrix, RolloutDataset};
use crate::numerics::{min_eigenvalue_sym, right_pseudo_inverse, Matrix};

/// Relative cutoff on `λ_min(UUᵀ)` below which the inputs count as
/// under-exciting.
pub const EXCITATION_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// All samples of every rollout, `T1 = T2`.
    Full,
    /// Only the last output of each rollout.
    FinalSample,
    /// `T1` Markov blocks regressed on rollouts of length `T2 ≥ T1`.
    UnequalLength,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::FinalSample => "final_sample",
            Method::UnequalLength => "unequal_length",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = SysIdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Method::Full),
            "final" | "final_sample" => Ok(Method::FinalSample),
            "unequal" | "unequal_length" => Ok(Method::UnequalLength),
            other => Err(SysIdError::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationResult {
    pub g_hat: MarkovMatrix,
    /// `‖Ĝ − G‖` when the truth is known.
    pub spectral_error: Option<f64>,
    /// `‖Ĝ − G‖ / ‖G‖` when the truth is known.
    pub normalized_error: Option<f64>,
    pub min_eig_uut: f64,
    pub method: Method,
    pub n_rollouts: usize,
    pub t1: usize,
    pub t2: usize,
}

impl EstimationResult {
    /// Fills in the error norms against the true Markov parameters.
    pub fn with_truth(mut self, truth: &MarkovMatrix) -> Result<Self> {
        let err = self.g_hat.distance(truth)?;
        let scale = truth.spectral_norm();
        self.spectral_error = Some(err);
        self.normalized_error = Some(if scale > 0.0 { err / scale } else { err });
        Ok(self)
    }
}

/// Solves `min_X ‖Y − XU‖_F` as `Ĝ = Y·U†`, after checking that `UUᵀ` is
/// safely positive definite.
fn solve(y: &Matrix, u: &Matrix, sigma_u: f64, n_samples: usize) -> Result<(Matrix, f64)> {
    let (rows, cols) = u.shape();
    let gram = u * u.transpose();
    let min_eig = min_eigenvalue_sym(&gram)?;
    if cols < rows {
        return Err(SysIdError::UnderExcitation {
            min_eig,
            needed: rows,
            available: cols,
        });
    }
    let scale = if sigma_u > 0.0 {
        sigma_u * sigma_u * n_samples as f64
    } else {
        gram.trace() / rows as f64
    };
    if !(min_eig > EXCITATION_RCOND * scale) {
        return Err(SysIdError::UnderExcitation {
            min_eig,
            needed: rows,
            available: cols,
        });
    }
    let pinv = right_pseudo_inverse(u).map_err(|e| match e {
        SysIdError::RankDeficient { .. } => SysIdError::UnderExcitation {
            min_eig,
            needed: rows,
            available: cols,
        },
        other => other,
    })?;
    Ok((y * pinv, min_eig))
}

fn ols(dm: &DataMatrices, method: Method) -> Result<EstimationResult> {
    let (g, min_eig) = solve(&dm.y, &dm.u, dm.sigma_u, dm.n_rollouts)?;
    Ok(EstimationResult {
        g_hat: MarkovMatrix::new(g, dm.input_dim())?,
        spectral_error: None,
        normalized_error: None,
        min_eig_uut: min_eig,
        method,
        n_rollouts: dm.n_rollouts,
        t1: dm.t1,
        t2: dm.t2,
    })
}

/// Multi-rollout OLS using every sample (`T1 = T2`).
pub fn ols_full(dm: &DataMatrices) -> Result<EstimationResult> {
    if dm.t1 != dm.t2 {
        return Err(SysIdError::InvalidInput(format!(
            "full-data OLS needs T1 = T2 (got T1 = {}, T2 = {}); use the unequal-length estimator",
            dm.t1, dm.t2
        )));
    }
    ols(dm, Method::Full)
}

/// OLS for `T1` Markov blocks from rollouts of length `T2 ≥ T1`. Identical to
/// [`ols_full`] when `T1 = T2`.
pub fn ols_unequal_length(dm: &DataMatrices) -> Result<EstimationResult> {
    ols(dm, Method::UnequalLength)
}

/// Final-sample baseline: regresses `y_{T−1}` of every rollout on the reversed
/// input stack `[u_{T−1}; …; u_0]`.
pub fn ols_final_sample(ds: &RolloutDataset) -> Result<EstimationResult> {
    let (n, t, m) = (ds.n_rollouts(), ds.rollout_length(), ds.input_dim());
    let p = ds.output_dim();
    let mut y = Matrix::zeros(p, n);
    let mut u = Matrix::zeros(m * t, n);
    for (i, r) in ds.rollouts.iter().enumerate() {
        y.set_column(i, &r.outputs.column(t - 1));
        for k in 0..t {
            u.view_mut((k * m, i), (m, 1))
                .copy_from(&r.inputs.column(t - 1 - k));
        }
    }
    if n < m * t {
        return Err(SysIdError::UnderExcitation {
            min_eig: 0.0,
            needed: m * t,
            available: n,
        });
    }
    let (g, min_eig) = solve(&y, &u, ds.noise.sigma_u, n)?;
    Ok(EstimationResult {
        g_hat: MarkovMatrix::new(g, m)?,
        spectral_error: None,
        normalized_error: None,
        min_eig_uut: min_eig,
        method: Method::FinalSample,
        n_rollouts: n,
        t1: t,
        t2: t,
    })
}
