//! Dense matrix kernels shared by every other module.
//!
//! Everything here is a pure function over `nalgebra` dense matrices. The
//! decompositions themselves (Cholesky, symmetric eigen, SVD) come from
//! `nalgebra`; this module fixes the contracts around them: finiteness checks,
//! ordering and sign conventions, rank cutoffs, and the Gelfand-formula
//! spectral radius.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SysIdError};

pub type Matrix = DMatrix<f64>;

/// Relative singular-value cutoff used by the SVD pseudo-inverse fallback.
pub const PINV_RCOND: f64 = 1e-12;

/// Relative asymmetry tolerated by [`min_eigenvalue_sym`].
pub const SYMMETRY_TOL: f64 = 1e-12;

const GELFAND_MAX_SQUARINGS: u32 = 24;
const GELFAND_TOL: f64 = 1e-8;

/// Singular value decomposition `A = U · diag(σ) · Vᵀ` with non-increasing
/// singular values.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: Matrix,
    pub singular_values: DVector<f64>,
    /// `cols × k` with orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        &self.u * Matrix::from_diagonal(&self.singular_values) * self.v.transpose()
    }

    /// Number of singular values strictly above `rel_tol · σ_max`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let smax = self.singular_values.get(0).copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > rel_tol * smax)
            .count()
    }
}

pub fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(SysIdError::InvalidInput(format!("{what} is empty")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(SysIdError::InvalidInput(format!(
            "{what} contains non-finite entries"
        )));
    }
    Ok(())
}

/// Largest singular value σ_max(A).
///
/// Computed from the largest eigenvalue of the smaller Gram matrix, which keeps
/// this route independent of [`svd`].
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    Ok(spectral_norm_unchecked(a))
}

pub(crate) fn spectral_norm_unchecked(a: &Matrix) -> f64 {
    let scale = a.amax();
    if scale == 0.0 {
        return 0.0;
    }
    // Pre-scaling keeps the Gram matrix away from overflow/underflow.
    let s = a / scale;
    let gram = if s.nrows() <= s.ncols() {
        &s * s.transpose()
    } else {
        s.transpose() * &s
    };
    let lmax = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0_f64, f64::max);
    scale * lmax.max(0.0).sqrt()
}

/// σ_max of a complex matrix (used for frequency responses).
pub fn spectral_norm_complex(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_sym(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    if !a.is_square() {
        return Err(SysIdError::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.amax();
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(SysIdError::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {asym:.3e}, scale {scale:.3e})"
        )));
    }
    let sym = (a + a.transpose()) * 0.5;
    Ok(sym
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Thin SVD with singular values sorted non-increasing.
///
/// Each singular pair is sign-normalized so that the largest-magnitude entry of
/// the left vector is positive, which makes the output deterministic.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    ensure_finite(a, "matrix")?;
    let dec = a.clone().svd(true, true);
    let (u, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(SysIdError::NumericFailure("SVD did not converge".into())),
    };
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        dec.singular_values[j]
            .partial_cmp(&dec.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut u_sorted = Matrix::zeros(a.nrows(), k);
    let mut v_sorted = Matrix::zeros(a.ncols(), k);
    let mut sv = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u.column(src).into_owned();
        let mut vcol = v_t.row(src).transpose();
        let pivot = ucol.iter().copied().fold(0.0_f64, |best, x| {
            if x.abs() > best.abs() {
                x
            } else {
                best
            }
        });
        if pivot < 0.0 {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        u_sorted.set_column(dst, &ucol);
        v_sorted.set_column(dst, &vcol);
        sv[dst] = dec.singular_values[src].max(0.0);
    }
    Ok(SvdResult {
        u: u_sorted,
        singular_values: sv,
        v: v_sorted,
    })
}

/// Moore–Penrose pseudo-inverse via SVD, zeroing singular values below
/// `rcond · σ_max`.
pub fn pseudo_inverse(a: &Matrix, rcond: f64) -> Result<Matrix> {
    let dec = svd(a)?;
    let smax = dec.singular_values.get(0).copied().unwrap_or(0.0);
    let inv: DVector<f64> = dec.singular_values.map(|s| {
        if s > rcond * smax && s > 0.0 {
            1.0 / s
        } else {
            0.0
        }
    });
    Ok(&dec.v * Matrix::from_diagonal(&inv) * dec.u.transpose())
}

/// Right pseudo-inverse `U† = Uᵀ(UUᵀ)⁻¹` of a full-row-rank matrix.
///
/// Tries a Cholesky solve of `UUᵀ` first. If the factorization fails or its
/// pivots are badly scaled, falls back to an SVD of `U` and reports rank
/// deficiency when `σ_min < σ_max · 1e-12`.
pub fn right_pseudo_inverse(u: &Matrix) -> Result<Matrix> {
    ensure_finite(u, "matrix")?;
    if u.nrows() > u.ncols() {
        return Err(SysIdError::InvalidInput(format!(
            "right pseudo-inverse needs rows <= cols, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let gram = u * u.transpose();
    if let Some(chol) = gram.cholesky() {
        let diag = chol.l_dirty().diagonal();
        let dmax = diag.amax();
        let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
        // L_ii² are the Cholesky pivots; a 1e-10 ratio on L keeps the
        // pivots within 1e-20 of each other before we trust the fast path.
        if dmin > 1e-10 * dmax {
            return Ok(chol.solve(u).transpose());
        }
    }
    let dec = svd(u)?;
    let smax = dec.singular_values[0];
    let smin = dec.singular_values[dec.singular_values.len() - 1];
    if !(smin > PINV_RCOND * smax) {
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        return Err(SysIdError::RankDeficient { condition });
    }
    let inv = dec.singular_values.map(|s| 1.0 / s);
    Ok(&dec.v * Matrix::from_diagonal(&inv) * dec.u.transpose())
}

/// Spectral radius by the Gelfand formula ρ(A) = lim ‖A^k‖^{1/k}.
///
/// Repeatedly squares a norm-scaled copy of `A`, tracking the accumulated
/// log-scale so `‖A^(2^k)‖` never overflows. Stops after 24 squarings or when
/// two successive estimates agree to a relative 1e-8.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    if !a.is_square() {
        return Err(SysIdError::InvalidInput(format!(
            "spectral radius needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let norm0 = spectral_norm_unchecked(a);
    if norm0 == 0.0 {
        return Ok(0.0);
    }
    let mut m = a / norm0;
    let mut log_norm = norm0.ln();
    let mut estimate = norm0;
    let mut power = 1.0_f64;
    for _ in 0..GELFAND_MAX_SQUARINGS {
        let sq = &m * &m;
        let c = spectral_norm_unchecked(&sq);
        if c == 0.0 {
            return Ok(0.0);
        }
        if !c.is_finite() {
            return Err(SysIdError::NumericFailure(
                "overflow while squaring in spectral radius estimate".into(),
            ));
        }
        m = sq / c;
        log_norm = 2.0 * log_norm + c.ln();
        power *= 2.0;
        let next = (log_norm / power).exp();
        if !next.is_finite() {
            return Err(SysIdError::NumericFailure(
                "spectral radius estimate is not finite".into(),
            ));
        }
        if (next - estimate).abs() <= GELFAND_TOL * next {
            return Ok(next);
        }
        estimate = next;
    }
    Ok(estimate)
}

/// Squared Frobenius norm of `Y − X·U`.
pub fn ls_objective(y: &Matrix, x: &Matrix, u: &Matrix) -> f64 {
    (y - x * u).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn spectral_norm_examples() {
        assert_relative_eq!(
            spectral_norm(&Matrix::identity(3, 3)).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            spectral_norm(&m(2, 2, &[3.0, 0.0, 0.0, 1.0])).unwrap(),
            3.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            spectral_norm(&m(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap(),
            1.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn spectral_norm_rejects_nan() {
        let a = m(1, 2, &[1.0, f64::NAN]);
        assert!(matches!(
            spectral_norm(&a),
            Err(SysIdError::InvalidInput(_))
        ));
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_relative_eq!(
            min_eigenvalue_sym(&Matrix::identity(2, 2)).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        let d = Matrix::from_diagonal(&DVector::from_vec(vec![5.0, 2.0, 7.0]));
        assert_relative_eq!(min_eigenvalue_sym(&d).unwrap(), 2.0, max_relative = 1e-10);
        assert_relative_eq!(
            min_eigenvalue_sym(&m(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap(),
            1.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn min_eigenvalue_rejects_asymmetric() {
        let a = m(2, 2, &[2.0, 1.0, 0.5, 2.0]);
        assert!(matches!(
            min_eigenvalue_sym(&a),
            Err(SysIdError::InvalidInput(_))
        ));
    }

    #[test]
    fn right_pseudo_inverse_examples() {
        let i3 = Matrix::identity(3, 3);
        assert!((right_pseudo_inverse(&i3).unwrap() - &i3).amax() < 1e-12);

        let u = m(2, 3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
        let expected = m(3, 2, &[0.5, 0.0, 0.0, 0.5, 0.0, 0.0]);
        assert!((right_pseudo_inverse(&u).unwrap() - expected).amax() < 1e-12);

        let row = m(1, 2, &[1.0, 1.0]);
        let expected = m(2, 1, &[0.5, 0.5]);
        assert!((right_pseudo_inverse(&row).unwrap() - expected).amax() < 1e-12);
    }

    #[test]
    fn right_pseudo_inverse_rank_deficient() {
        let u = m(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        match right_pseudo_inverse(&u) {
            Err(SysIdError::RankDeficient { condition }) => assert!(condition > 1e12),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn right_pseudo_inverse_rejects_tall() {
        let u = m(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert!(right_pseudo_inverse(&u).is_err());
    }

    #[test]
    fn svd_sorted_and_signed() {
        let a = m(3, 2, &[1.0, 2.0, -3.0, 0.5, 0.0, 4.0]);
        let dec = svd(&a).unwrap();
        assert!(dec.singular_values[0] >= dec.singular_values[1]);
        assert!((dec.reconstruct() - &a).amax() < 1e-12);
        for j in 0..dec.u.ncols() {
            let col = dec.u.column(j);
            let pivot = col
                .iter()
                .copied()
                .fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn spectral_radius_examples() {
        let d = m(2, 2, &[1.5, 0.0, 0.0, 0.3]);
        assert_relative_eq!(spectral_radius(&d).unwrap(), 1.5, max_relative = 1e-6);

        // Double eigenvalue 1 with a Jordan block: the slowest Gelfand case.
        let newton = m(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert_relative_eq!(spectral_radius(&newton).unwrap(), 1.0, max_relative = 1e-6);

        let tri = m(
            3,
            3,
            &[1.01, 0.01, 0.0, 0.01, 1.01, 0.01, 0.0, 0.01, 1.01],
        );
        let expected = 1.01 + 0.02 * (std::f64::consts::PI / 4.0).cos();
        assert_relative_eq!(spectral_radius(&tri).unwrap(), expected, max_relative = 1e-6);
    }

    #[test]
    fn spectral_radius_of_nilpotent_is_zero() {
        assert_eq!(spectral_radius(&m(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(spectral_radius(&Matrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn spectral_radius_rotation() {
        // Complex pair of modulus 0.9.
        let (c, s) = (0.9 * 0.3_f64.cos(), 0.9 * 0.3_f64.sin());
        let r = m(2, 2, &[c, -s, s, c]);
        assert_relative_eq!(spectral_radius(&r).unwrap(), 0.9, max_relative = 1e-6);
    }

    #[test]
    fn complex_norm_matches_real() {
        let a = m(2, 2, &[3.0, 1.0, -1.0, 2.0]);
        let ac = a.map(|x| Complex64::new(x, 0.0));
        assert_relative_eq!(
            spectral_norm_complex(&ac),
            spectral_norm(&a).unwrap(),
            max_relative = 1e-10
        );
    }
}
