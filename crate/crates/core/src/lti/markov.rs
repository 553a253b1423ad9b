use nalgebra::DMatrixView;
use serde::{Deserialize, Serialize};

use super::model::SystemModel;
use crate::error::{Result, SysIdError};
use crate::numerics::{spectral_norm_unchecked, Matrix};

/// A `rows × (block_width · horizon)` row of blocks, e.g. the Markov
/// parameters `G = [D, CB, CAB, …, CA^{T−2}B]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovMatrix {
    #[serde(with = "crate::serde_matrix")]
    block_row: Matrix,
    block_width: usize,
    horizon: usize,
}

impl MarkovMatrix {
    pub fn new(block_row: Matrix, block_width: usize) -> Result<Self> {
        if block_width == 0 || block_row.ncols() == 0 || block_row.ncols() % block_width != 0 {
            return Err(SysIdError::DimensionMismatch(format!(
                "{} columns is not a positive multiple of block width {block_width}",
                block_row.ncols()
            )));
        }
        let horizon = block_row.ncols() / block_width;
        Ok(Self {
            block_row,
            block_width,
            horizon,
        })
    }

    pub fn block_row(&self) -> &Matrix {
        &self.block_row
    }
    pub fn into_matrix(self) -> Matrix {
        self.block_row
    }
    pub fn block_width(&self) -> usize {
        self.block_width
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn rows(&self) -> usize {
        self.block_row.nrows()
    }

    /// The `k`-th block (0-based).
    pub fn block(&self, k: usize) -> DMatrixView<'_, f64> {
        self.block_row
            .view((0, k * self.block_width), (self.rows(), self.block_width))
    }

    /// First `horizon` blocks.
    pub fn truncate(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon {
            return Err(SysIdError::InsufficientHorizon {
                needed: horizon,
                available: self.horizon,
            });
        }
        Self::new(
            self.block_row
                .columns(0, horizon * self.block_width)
                .into_owned(),
            self.block_width,
        )
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_unchecked(&self.block_row)
    }

    /// `‖self − other‖` in the spectral norm.
    pub fn distance(&self, other: &MarkovMatrix) -> Result<f64> {
        if self.block_row.shape() != other.block_row.shape() {
            return Err(SysIdError::DimensionMismatch(format!(
                "Markov matrices have shapes {:?} and {:?}",
                self.block_row.shape(),
                other.block_row.shape()
            )));
        }
        Ok(spectral_norm_unchecked(&(&self.block_row - &other.block_row)))
    }
}

fn check_horizon(t: usize) -> Result<()> {
    if t == 0 {
        return Err(SysIdError::InvalidInput("horizon must be at least 1".into()));
    }
    Ok(())
}

/// `[lead, C·input, C·A·input, …, C·A^{T−2}·input]`.
fn impulse_row(sys: &SystemModel, lead: &Matrix, input: &Matrix, t: usize) -> Result<MarkovMatrix> {
    check_horizon(t)?;
    let (p, w) = (sys.p(), input.ncols());
    let mut out = Matrix::zeros(p, w * t);
    out.view_mut((0, 0), (p, w)).copy_from(lead);
    let mut ca = sys.c().clone();
    for k in 1..t {
        out.view_mut((0, k * w), (p, w)).copy_from(&(&ca * input));
        ca = &ca * sys.a();
    }
    MarkovMatrix::new(out, w)
}

/// First `T` Markov parameters `G = [D, CB, CAB, …, CA^{T−2}B]`, `p × mT`.
pub fn true_markov(sys: &SystemModel, t: usize) -> Result<MarkovMatrix> {
    impulse_row(sys, sys.d(), sys.b(), t)
}

/// Process-noise Markov parameters `F = [0, CB_w, CAB_w, …, CA^{T−2}B_w]`, `p × qT`.
pub fn noise_markov_f(sys: &SystemModel, t: usize) -> Result<MarkovMatrix> {
    impulse_row(sys, &Matrix::zeros(sys.p(), sys.q()), sys.bw(), t)
}

/// Initial-state response `H = [C, CA, …, CA^{T−1}]`, `p × nT`.
pub fn init_state_markov_h(sys: &SystemModel, t: usize) -> Result<MarkovMatrix> {
    check_horizon(t)?;
    let (p, n) = (sys.p(), sys.n());
    let mut out = Matrix::zeros(p, n * t);
    let mut ca = sys.c().clone();
    for k in 0..t {
        out.view_mut((0, k * n), (p, n)).copy_from(&ca);
        ca = &ca * sys.a();
    }
    MarkovMatrix::new(out, n)
}

/// Block Hankel matrix `𝓗` (`pT1 × m(T2h+1)`) together with `𝓗⁻` (last block
/// column dropped) and `𝓗⁺` (first block column dropped).
#[derive(Debug, Clone)]
pub struct HankelTriple {
    pub h: Matrix,
    pub h_minus: Matrix,
    pub h_plus: Matrix,
    pub t1: usize,
    pub t2h: usize,
}

/// Assembles the Hankel triple; block `(i, j)` is Markov block `i + j + 1`, so
/// the feedthrough block `D` never enters.
pub fn build_hankel(g: &MarkovMatrix, t1: usize, t2h: usize) -> Result<HankelTriple> {
    if t1 == 0 || t2h == 0 {
        return Err(SysIdError::InvalidInput(
            "Hankel dimensions T1 and T2 must be at least 1".into(),
        ));
    }
    let needed = t1 + t2h + 1;
    if g.horizon() < needed {
        return Err(SysIdError::InsufficientHorizon {
            needed,
            available: g.horizon(),
        });
    }
    let (p, m) = (g.rows(), g.block_width());
    let mut h = Matrix::zeros(p * t1, m * (t2h + 1));
    for i in 0..t1 {
        for j in 0..=t2h {
            h.view_mut((i * p, j * m), (p, m))
                .copy_from(&g.block(i + j + 1));
        }
    }
    let h_minus = h.columns(0, m * t2h).into_owned();
    let h_plus = h.columns(m, m * t2h).into_owned();
    Ok(HankelTriple {
        h,
        h_minus,
        h_plus,
        t1,
        t2h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin::{newton, unstable_3x3};
    use crate::numerics::svd;

    fn row(data: &[f64]) -> Matrix {
        Matrix::from_row_slice(1, data.len(), data)
    }

    #[test]
    fn newton_markov() {
        let sys = newton(0.2);
        let g = true_markov(&sys, 4).unwrap();
        assert!((g.block_row() - row(&[0.0, 0.0, 0.2, 0.4])).amax() < 1e-15);
        assert_eq!(g.horizon(), 4);
        let g1 = true_markov(&sys, 1).unwrap();
        assert_eq!(g1.block_row(), sys.d());
    }

    #[test]
    fn unstable_markov() {
        let g = true_markov(&unstable_3x3(), 2).unwrap();
        assert_eq!(g.block_row(), &row(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn noise_markov() {
        let f = noise_markov_f(&newton(0.2), 4).unwrap();
        assert!((f.block_row() - row(&[0.0, 0.0, 0.2, 0.4])).amax() < 1e-15);
        let f1 = noise_markov_f(&unstable_3x3(), 1).unwrap();
        assert_eq!(f1.block_row(), &Matrix::zeros(1, 3));
        let f2 = noise_markov_f(&unstable_3x3(), 2).unwrap();
        assert_eq!(f2.block_row(), &row(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn init_state_markov() {
        let h = init_state_markov_h(&newton(0.2), 2).unwrap();
        assert!((h.block_row() - row(&[1.0, 0.0, 1.0, 0.2])).amax() < 1e-15);
        let sys = newton(0.2);
        assert_eq!(init_state_markov_h(&sys, 1).unwrap().block_row(), sys.c());
        let h3 = init_state_markov_h(&unstable_3x3(), 1).unwrap();
        assert_eq!(h3.block_row(), &row(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn zero_horizon_rejected() {
        assert!(true_markov(&newton(0.2), 0).is_err());
    }

    #[test]
    fn newton_hankel() {
        let g = true_markov(&newton(0.2), 5).unwrap();
        let hk = build_hankel(&g, 2, 2).unwrap();
        let h = Matrix::from_row_slice(2, 3, &[0.0, 0.2, 0.4, 0.2, 0.4, 0.6]);
        assert!((&hk.h - h).amax() < 1e-15);
        let hm = Matrix::from_row_slice(2, 2, &[0.0, 0.2, 0.2, 0.4]);
        assert!((&hk.h_minus - &hm).amax() < 1e-15);
        assert!((hm.determinant() + 0.04).abs() < 1e-15);
        assert_eq!(svd(&hk.h_minus).unwrap().numerical_rank(1e-9), 2);
        let hp = Matrix::from_row_slice(2, 2, &[0.2, 0.4, 0.4, 0.6]);
        assert!((&hk.h_plus - hp).amax() < 1e-15);
    }

    #[test]
    fn hankel_needs_horizon() {
        let g = true_markov(&newton(0.2), 3).unwrap();
        assert!(matches!(
            build_hankel(&g, 2, 2),
            Err(SysIdError::InsufficientHorizon { needed: 5, available: 3 })
        ));
    }

    #[test]
    fn truncate_keeps_leading_blocks() {
        let g = true_markov(&unstable_3x3(), 6).unwrap();
        let t = g.truncate(2).unwrap();
        assert_eq!(t.block_row(), true_markov(&unstable_3x3(), 2).unwrap().block_row());
        assert!(g.truncate(7).is_err());
    }
}
