use rand::Rng;

use crate::error::{Result, SysIdError};
use crate::lti::SystemModel;
use crate::numerics::{spectral_radius, Matrix};
use crate::rng::stream;

/// Below this spectral radius `A` counts as nilpotent.
pub const NILPOTENT_TOL: f64 = 1e-12;

/// Discretized double integrator: `A = [[1, Δ], [0, 1]]`, `B = B_w = [0; 1]`,
/// `C = [1, 0]`, `D = 0`, `D_v = 1`.
pub fn newton(delta: f64) -> SystemModel {
    let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
    SystemModel::new(
        Matrix::from_row_slice(2, 2, &[1.0, delta, 0.0, 1.0]),
        b.clone(),
        Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
        Matrix::zeros(1, 1),
        b,
        Matrix::identity(1, 1),
    )
    .expect("valid builtin")
}

/// Open-loop unstable tridiagonal system with `ρ(A) ≈ 1.024`.
pub fn unstable_3x3() -> SystemModel {
    #[rustfmt::skip]
    let a = Matrix::from_row_slice(3, 3, &[
        1.01, 0.01, 0.0,
        0.01, 1.01, 0.01,
        0.0, 0.01, 1.01,
    ]);
    SystemModel::new(
        a,
        Matrix::identity(3, 3),
        Matrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]),
        Matrix::zeros(1, 3),
        Matrix::identity(3, 3),
        Matrix::identity(1, 1),
    )
    .expect("valid builtin")
}

/// Looks up a builtin by name: `newton` (Δ = 0.2), `newton_delta(Δ)`, or
/// `unstable_3x3`.
pub fn builtin_system(name: &str) -> Result<SystemModel> {
    let name = name.trim();
    match name {
        "newton" | "newton_delta" => return Ok(newton(0.2)),
        "unstable_3x3" | "unstable" => return Ok(unstable_3x3()),
        _ => {}
    }
    if let Some(arg) = name
        .strip_prefix("newton_delta(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let delta: f64 = arg
            .trim()
            .parse()
            .map_err(|_| SysIdError::NotFound(format!("bad newton_delta argument {arg:?}")))?;
        if delta.is_finite() {
            return Ok(newton(delta));
        }
    }
    Err(SysIdError::NotFound(format!("no builtin system named {name:?}")))
}

/// Random integer-entry system: `A ∈ {1..5}^{n×n}`, `B, C, D ∈ {−2..2}`,
/// with `B_w = I_n` and `D_v = I_p`.
pub fn random_system(seed: u64, n: usize, m: usize, p: usize) -> Result<SystemModel> {
    if n == 0 || m == 0 || p == 0 {
        return Err(SysIdError::InvalidInput("dimensions must be positive".into()));
    }
    let mut rng = stream(seed);
    let mut draw = |rows: usize, cols: usize, lo: i32, hi: i32| {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(lo..=hi) as f64)
    };
    let a = draw(n, n, 1, 5);
    let b = draw(n, m, -2, 2);
    let c = draw(p, n, -2, 2);
    let d = draw(p, m, -2, 2);
    SystemModel::new(a, b, c, d, Matrix::identity(n, n), Matrix::identity(p, p))
}

/// Scales `A` so that its spectral radius becomes `target_rho`.
pub fn rescale_to_radius(sys: &SystemModel, target_rho: f64) -> Result<SystemModel> {
    if !(target_rho > 0.0 && target_rho.is_finite()) {
        return Err(SysIdError::InvalidInput(format!(
            "target spectral radius must be positive, got {target_rho}"
        )));
    }
    let rho = spectral_radius(sys.a())?;
    if rho <= NILPOTENT_TOL {
        return Err(SysIdError::CannotRescale);
    }
    sys.with_a(sys.a() * (target_rho / rho))
}
