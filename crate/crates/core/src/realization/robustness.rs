use serde::Serialize;

use super::ho_kalman::{ho_kalman, Realization};
use crate::error::{Result, SysIdError};
use crate::lti::{build_hankel, true_markov, SystemModel};
use crate::numerics::{spectral_norm, svd, Matrix};

/// Absolute slack, relative to the problem scale, allowed on each inequality
/// for floating-point round-off.
pub const ROUNDOFF_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    /// `‖𝓗 − 𝓗̂‖ ≤ σ_min(𝓗⁻)/4`.
    pub regime_entered: bool,
    pub hankel_error: f64,
    pub sigma_min_h_minus: f64,
    pub hankel_norm: f64,
    pub b_error: f64,
    pub c_error: f64,
    pub a_error: f64,
    pub bc_bound: f64,
    pub a_bound: f64,
    pub bc_holds: bool,
    pub a_holds: bool,
    #[serde(with = "crate::serde_matrix")]
    pub alignment: Matrix,
}

impl RobustnessReport {
    pub fn all_hold(&self) -> bool {
        self.bc_holds && self.a_holds
    }

    pub fn status(&self) -> &'static str {
        match (self.regime_entered, self.all_hold()) {
            (false, _) => "robustness regime not entered",
            (true, true) => "all inequalities hold",
            (true, false) => "inequality violated",
        }
    }
}

/// Orthogonal `Q` minimizing `‖P·Q − T‖_F`.
fn procrustes(p: &Matrix, t: &Matrix) -> Result<Matrix> {
    let dec = svd(&(p.transpose() * t))?;
    Ok(&dec.u * dec.v.transpose())
}

/// Compares an estimated realization with the truth, in the truth's Ho-Kalman
/// coordinates, against the perturbation inequalities driven by the Hankel
/// error `h_spec_err`.
///
/// The unitary `S` is the Procrustes alignment of the regenerated
/// observability matrices, so that `Ĉ ≈ C·Sᵀ`.
pub fn realization_robustness_check(
    truth: &SystemModel,
    est: &Realization,
    h_spec_err: f64,
) -> Result<RobustnessReport> {
    let n = truth.n();
    if est.order != n {
        return Err(SysIdError::DimensionMismatch(format!(
            "realization order {} differs from system order {n}",
            est.order
        )));
    }
    if !(h_spec_err >= 0.0) {
        return Err(SysIdError::InvalidInput(format!(
            "Hankel error must be non-negative, got {h_spec_err}"
        )));
    }
    let (t1, t2h) = (est.t1, est.t2h);
    let g = true_markov(truth, t1 + t2h + 1)?;
    let reference = ho_kalman(&g, n, t1, t2h)?;
    let sv = &reference.hankel_singular_values;
    let sigma_min = sv[n - 1];
    if !(sigma_min > 1e-12 * sv[0]) {
        return Err(SysIdError::InvalidInput(
            "system is not controllable and observable over the Hankel window".into(),
        ));
    }
    let hankel_norm = spectral_norm(&build_hankel(&g, t1, t2h)?.h)?;

    let q = procrustes(&reference.observability_matrix(t1), &est.observability_matrix(t1))?;
    let s = q.transpose();
    let b_error = spectral_norm(&(&est.b - &s * &reference.b))?;
    let c_error = spectral_norm(&(&est.c - &reference.c * s.transpose()))?;
    let a_error = spectral_norm(&(&est.a - &s * &reference.a * s.transpose()))?;

    let root = (n as f64 * h_spec_err).sqrt();
    let bc_bound = 5.0 * root;
    let a_bound = 50.0 * root * hankel_norm / sigma_min.powf(1.5);
    let slack = ROUNDOFF_SLACK * hankel_norm.max(1.0);

    Ok(RobustnessReport {
        regime_entered: h_spec_err <= sigma_min / 4.0,
        hankel_error: h_spec_err,
        sigma_min_h_minus: sigma_min,
        hankel_norm,
        b_error,
        c_error,
        a_error,
        bc_bound,
        a_bound,
        bc_holds: b_error.max(c_error) <= bc_bound + slack,
        a_holds: a_error <= a_bound + slack,
        alignment: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin::unstable_3x3;
    use crate::lti::MarkovMatrix;

    #[test]
    fn exact_estimate_holds_trivially() {
        let sys = unstable_3x3();
        let g = true_markov(&sys, 9).unwrap();
        let est = ho_kalman(&g, 3, 4, 4).unwrap();
        let rep = realization_robustness_check(&sys, &est, 0.0).unwrap();
        assert!(rep.regime_entered);
        assert!(rep.all_hold());
        assert!(rep.b_error.max(rep.c_error).max(rep.a_error) < 1e-8);
    }

    #[test]
    fn large_error_leaves_regime() {
        let sys = unstable_3x3();
        let g = true_markov(&sys, 9).unwrap();
        let mut noisy = g.block_row().clone();
        noisy.add_scalar_mut(5.0);
        let g_hat = MarkovMatrix::new(noisy, 3).unwrap();
        let est = ho_kalman(&g_hat, 3, 4, 4).unwrap();
        let err = spectral_norm(&(build_hankel(&g_hat, 4, 4).unwrap().h - build_hankel(&g, 4, 4).unwrap().h)).unwrap();
        let rep = realization_robustness_check(&sys, &est, err).unwrap();
        assert!(!rep.regime_entered);
        assert_eq!(rep.status(), "robustness regime not entered");
    }

    #[test]
    fn alignment_is_orthogonal() {
        let sys = unstable_3x3();
        let g = true_markov(&sys, 9).unwrap();
        let est = ho_kalman(&g, 3, 4, 4).unwrap();
        let rep = realization_robustness_check(&sys, &est, 0.0).unwrap();
        let s = &rep.alignment;
        assert!((s * s.transpose() - Matrix::identity(3, 3)).amax() < 1e-10);
    }
}
