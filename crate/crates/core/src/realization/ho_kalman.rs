use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SysIdError};
use crate::lti::{build_hankel, MarkovMatrix, SystemModel};
use crate::numerics::{svd, Matrix};

/// The `(n+1)`-th Hankel singular value above this fraction of the `n`-th
/// flags the requested order as ambiguous.
pub const ORDER_GAP_RATIO: f64 = 0.5;

/// State-space realization `(Â, B̂, Ĉ, D̂)` recovered from Markov parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub order: usize,
    #[serde(with = "crate::serde_matrix")]
    pub a: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub b: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub c: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub d: Matrix,
    /// All singular values of `𝓗⁻`, non-increasing.
    #[serde(with = "crate::serde_matrix::vector")]
    pub hankel_singular_values: DVector<f64>,
    pub t1: usize,
    pub t2h: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl Realization {
    /// Regenerates `[D̂, ĈB̂, ĈÂB̂, …]` with `horizon` blocks.
    pub fn markov(&self, horizon: usize) -> Result<MarkovMatrix> {
        if horizon == 0 {
            return Err(SysIdError::InvalidInput("horizon must be at least 1".into()));
        }
        let (p, m) = self.d.shape();
        let mut out = Matrix::zeros(p, m * horizon);
        out.view_mut((0, 0), (p, m)).copy_from(&self.d);
        let mut ca = self.c.clone();
        for k in 1..horizon {
            out.view_mut((0, k * m), (p, m)).copy_from(&(&ca * &self.b));
            ca = &ca * &self.a;
        }
        MarkovMatrix::new(out, m)
    }

    /// `[Ĉ; ĈÂ; …; ĈÂ^{k−1}]`.
    pub fn observability_matrix(&self, k: usize) -> Matrix {
        let (p, n) = self.c.shape();
        let mut out = Matrix::zeros(p * k, n);
        let mut ca = self.c.clone();
        for i in 0..k {
            out.view_mut((i * p, 0), (p, n)).copy_from(&ca);
            ca = &ca * &self.a;
        }
        out
    }

    /// As a [`SystemModel`] with zero single-channel noise inputs.
    pub fn to_system(&self) -> Result<SystemModel> {
        SystemModel::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            Matrix::zeros(self.order, 1),
            Matrix::zeros(self.c.nrows(), 1),
        )
    }
}

/// Ho-Kalman realization of order `n` from the Hankel matrices built with
/// `T1` block rows and `T2h` block columns.
///
/// `𝓗⁻ = U Σ Vᵀ` truncated to rank `n`; `𝒪 = U Σ^{1/2}`, `𝒞 = Σ^{1/2} Vᵀ`;
/// `Ĉ` and `B̂` are the leading blocks of `𝒪` and `𝒞`; `Â = 𝒪† 𝓗⁺ 𝒞†`;
/// `D̂` is the leading block of `G`.
pub fn ho_kalman(g: &MarkovMatrix, n: usize, t1: usize, t2h: usize) -> Result<Realization> {
    if n == 0 {
        return Err(SysIdError::InvalidInput("order must be at least 1".into()));
    }
    let hankel = build_hankel(g, t1, t2h)?;
    if t1.min(t2h) < n {
        return Err(SysIdError::InvalidInput(format!(
            "need min(T1, T2) >= n, got T1 = {t1}, T2 = {t2h}, n = {n}"
        )));
    }
    let (p, m) = (g.rows(), g.block_width());
    let dec = svd(&hankel.h_minus)?;
    let sv = &dec.singular_values;
    if n > sv.len() || !(sv[n - 1] > 0.0) {
        return Err(SysIdError::NumericFailure(format!(
            "Hankel matrix has rank below the requested order {n}"
        )));
    }
    let warning = (sv.len() > n && sv[n] > ORDER_GAP_RATIO * sv[n - 1]).then(|| {
        format!(
            "ambiguous order: singular value {} = {:.3e} exceeds {} x singular value {} = {:.3e}",
            n + 1,
            sv[n],
            ORDER_GAP_RATIO,
            n,
            sv[n - 1]
        )
    });

    let u_n = dec.u.columns(0, n);
    let v_n = dec.v.columns(0, n);
    let sqrt_s = sv.rows(0, n).map(f64::sqrt);
    let inv_sqrt = sqrt_s.map(|s| 1.0 / s);
    let obs = u_n * Matrix::from_diagonal(&sqrt_s);
    let ctrl = Matrix::from_diagonal(&sqrt_s) * v_n.transpose();
    // U and V have orthonormal columns, so 𝒪† = Σ^{-1/2} Uᵀ and 𝒞† = V Σ^{-1/2}.
    let a = Matrix::from_diagonal(&inv_sqrt)
        * u_n.transpose()
        * &hankel.h_plus
        * v_n
        * Matrix::from_diagonal(&inv_sqrt);

    Ok(Realization {
        order: n,
        a,
        b: ctrl.columns(0, m).into_owned(),
        c: obs.rows(0, p).into_owned(),
        d: g.block(0).into_owned(),
        hankel_singular_values: sv.clone(),
        t1,
        t2h,
        warning,
    })
}

/// Upper bound `√min(T1, T2h+1) · ‖G − Ĝ‖` on the Hankel perturbation.
pub fn hankel_perturbation_bound(g_err_spec: f64, t1: usize, t2h: usize) -> Result<f64> {
    if !(g_err_spec >= 0.0) {
        return Err(SysIdError::InvalidInput(format!(
            "error norm must be non-negative, got {g_err_spec}"
        )));
    }
    Ok((t1.min(t2h + 1) as f64).sqrt() * g_err_spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin::{newton, unstable_3x3};
    use crate::lti::true_markov;

    #[test]
    fn unstable_round_trip() {
        let g = true_markov(&unstable_3x3(), 9).unwrap();
        let r = ho_kalman(&g, 3, 4, 4).unwrap();
        let regen = r.markov(9).unwrap();
        assert!(regen.distance(&g).unwrap() <= 1e-8);
        assert_eq!(r.order, 3);
        assert_eq!(r.b.shape(), (3, 3));
        assert_eq!(r.c.shape(), (1, 3));
    }

    #[test]
    fn newton_round_trip() {
        let g = true_markov(&newton(0.2), 5).unwrap();
        let r = ho_kalman(&g, 2, 2, 2).unwrap();
        let regen = r.markov(5).unwrap();
        let expected = Matrix::from_row_slice(1, 5, &[0.0, 0.0, 0.2, 0.4, 0.6]);
        assert!((regen.block_row() - expected).amax() <= 1e-10);
        assert!(r.warning.is_none());
    }

    #[test]
    fn short_horizon_rejected() {
        let g = true_markov(&newton(0.2), 3).unwrap();
        assert!(matches!(
            ho_kalman(&g, 2, 2, 2),
            Err(SysIdError::InsufficientHorizon { .. })
        ));
    }

    #[test]
    fn overstated_order_warns() {
        // Order 2 system asked for order 1 with a weak gap.
        let g = true_markov(&newton(0.2), 7).unwrap();
        let r = ho_kalman(&g, 1, 3, 3).unwrap();
        assert!(r.warning.is_some() || r.hankel_singular_values[1] <= 0.5 * r.hankel_singular_values[0]);
    }

    #[test]
    fn perturbation_bound_examples() {
        assert_eq!(hankel_perturbation_bound(0.0, 3, 7).unwrap(), 0.0);
        assert_eq!(hankel_perturbation_bound(1.0, 4, 4).unwrap(), 2.0);
        assert_eq!(hankel_perturbation_bound(0.5, 9, 3).unwrap(), 1.0);
        assert!(hankel_perturbation_bound(-1.0, 2, 2).is_err());
    }

    #[test]
    fn json_export() {
        let g = true_markov(&newton(0.2), 5).unwrap();
        let r = ho_kalman(&g, 2, 2, 2).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"hankel_singular_values\""));
        let back: Realization = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
