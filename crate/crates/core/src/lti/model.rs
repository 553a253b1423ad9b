use serde::{Deserialize, Serialize};

use crate::error::{Result, SysIdError};
use crate::numerics::{ensure_finite, Matrix};

/// Discrete-time LTI system
///
/// ```text
/// x_{t+1} = A x_t + B u_t + B_w w_t
/// y_t     = C x_t + D u_t + D_v v_t
/// ```
///
/// with state dimension `n`, input `m`, output `p`, process noise `q` and
/// measurement noise `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemModelRepr", into = "SystemModelRepr")]
pub struct SystemModel {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
    bw: Matrix,
    dv: Matrix,
}

impl SystemModel {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix, bw: Matrix, dv: Matrix) -> Result<Self> {
        for (m, name) in [
            (&a, "A"),
            (&b, "B"),
            (&c, "C"),
            (&d, "D"),
            (&bw, "B_w"),
            (&dv, "D_v"),
        ] {
            ensure_finite(m, name)?;
        }
        let n = a.nrows();
        let dim_err = |msg: String| Err(SysIdError::DimensionMismatch(msg));
        if !a.is_square() {
            return dim_err(format!("A must be square, got {}x{}", a.nrows(), a.ncols()));
        }
        if b.nrows() != n {
            return dim_err(format!("B must have {n} rows, got {}", b.nrows()));
        }
        if c.ncols() != n {
            return dim_err(format!("C must have {n} columns, got {}", c.ncols()));
        }
        let (p, m) = (c.nrows(), b.ncols());
        if d.nrows() != p || d.ncols() != m {
            return dim_err(format!("D must be {p}x{m}, got {}x{}", d.nrows(), d.ncols()));
        }
        if bw.nrows() != n {
            return dim_err(format!("B_w must have {n} rows, got {}", bw.nrows()));
        }
        if dv.nrows() != p {
            return dim_err(format!("D_v must have {p} rows, got {}", dv.nrows()));
        }
        Ok(Self { a, b, c, d, bw, dv })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }
    pub fn bw(&self) -> &Matrix {
        &self.bw
    }
    pub fn dv(&self) -> &Matrix {
        &self.dv
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
    /// Process-noise dimension.
    pub fn q(&self) -> usize {
        self.bw.ncols()
    }
    /// Measurement-noise dimension.
    pub fn l(&self) -> usize {
        self.dv.ncols()
    }

    /// Same system with `A` replaced.
    pub fn with_a(&self, a: Matrix) -> Result<Self> {
        Self::new(
            a,
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.bw.clone(),
            self.dv.clone(),
        )
    }

    /// Applies the state coordinate change `x' = S x`:
    /// `(S A S⁻¹, S B, C S⁻¹, D, S B_w, D_v)`.
    pub fn similarity(&self, s: &Matrix) -> Result<Self> {
        let s_inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| SysIdError::InvalidInput("similarity matrix is singular".into()))?;
        Self::new(
            s * &self.a * &s_inv,
            s * &self.b,
            &self.c * &s_inv,
            self.d.clone(),
            s * &self.bw,
            self.dv.clone(),
        )
    }

    /// `[C; CA; …; CA^{k−1}]`, `pk × n`.
    pub fn observability_matrix(&self, k: usize) -> Matrix {
        let (n, p) = (self.n(), self.p());
        let mut out = Matrix::zeros(p * k, n);
        let mut ca = self.c.clone();
        for i in 0..k {
            out.view_mut((i * p, 0), (p, n)).copy_from(&ca);
            ca = &ca * &self.a;
        }
        out
    }

    /// `[B, AB, …, A^{k−1}B]`, `n × mk`.
    pub fn controllability_matrix(&self, k: usize) -> Matrix {
        let (n, m) = (self.n(), self.m());
        let mut out = Matrix::zeros(n, m * k);
        let mut ab = self.b.clone();
        for i in 0..k {
            out.view_mut((0, i * m), (n, m)).copy_from(&ab);
            ab = &self.a * &ab;
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct SystemModelRepr {
    #[serde(with = "crate::serde_matrix")]
    a: Matrix,
    #[serde(with = "crate::serde_matrix")]
    b: Matrix,
    #[serde(with = "crate::serde_matrix")]
    c: Matrix,
    #[serde(with = "crate::serde_matrix")]
    d: Matrix,
    #[serde(with = "crate::serde_matrix")]
    b_w: Matrix,
    #[serde(with = "crate::serde_matrix")]
    d_v: Matrix,
}

impl TryFrom<SystemModelRepr> for SystemModel {
    type Error = SysIdError;
    fn try_from(r: SystemModelRepr) -> Result<Self> {
        SystemModel::new(r.a, r.b, r.c, r.d, r.b_w, r.d_v)
    }
}

impl From<SystemModel> for SystemModelRepr {
    fn from(s: SystemModel) -> Self {
        SystemModelRepr {
            a: s.a,
            b: s.b,
            c: s.c,
            d: s.d,
            b_w: s.bw,
            d_v: s.dv,
        }
    }
}

/// Standard deviations of the input excitation and the three noise sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma_u: f64,
    #[serde(default)]
    pub sigma_w: f64,
    #[serde(default)]
    pub sigma_v: f64,
    /// Initial-state std; zero means every rollout starts at `x_0 = 0`.
    #[serde(default)]
    pub sigma_0: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_u: 1.0,
            sigma_w: 0.0,
            sigma_v: 0.0,
            sigma_0: 0.0,
        }
    }
}

impl NoiseConfig {
    pub fn new(sigma_u: f64, sigma_w: f64, sigma_v: f64, sigma_0: f64) -> Result<Self> {
        let cfg = Self {
            sigma_u,
            sigma_w,
            sigma_v,
            sigma_0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noiseless(sigma_u: f64) -> Self {
        Self {
            sigma_u,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.sigma_u, "sigma_u"),
            (self.sigma_w, "sigma_w"),
            (self.sigma_v, "sigma_v"),
            (self.sigma_0, "sigma_0"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SysIdError::InvalidInput(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_dimensions() {
        let a = Matrix::identity(2, 2);
        let b = Matrix::zeros(3, 1);
        let c = Matrix::zeros(1, 2);
        let err = SystemModel::new(
            a,
            b,
            c,
            Matrix::zeros(1, 1),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 1),
        );
        assert!(matches!(err, Err(SysIdError::DimensionMismatch(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Matrix::identity(1, 1);
        a[(0, 0)] = f64::INFINITY;
        let one = Matrix::identity(1, 1);
        let err = SystemModel::new(a, one.clone(), one.clone(), one.clone(), one.clone(), one);
        assert!(matches!(err, Err(SysIdError::InvalidInput(_))));
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseConfig::new(1.0, -0.1, 0.0, 0.0).is_err());
        assert!(NoiseConfig::new(1.0, 0.2, 0.5, 0.0).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let sys = SystemModel::new(
            a,
            b.clone(),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix::zeros(1, 1),
            b,
            Matrix::identity(1, 1),
        )
        .unwrap();
        let text = serde_json::to_string(&sys).unwrap();
        assert!(text.contains("\"a\":[[1.0,0.2],[0.0,1.0]]"));
        let back: SystemModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sys);
    }
}
