use super::data_matrices::DataMatrices;
use crate::error::{Result, SysIdError};
use crate::lti::{init_state_markov_h, noise_markov_f, replay_states, true_markov, MarkovMatrix, SystemModel};
use crate::numerics::{right_pseudo_inverse, spectral_norm_unchecked, Matrix};

/// Stacked contribution of states the regressor window cannot see.
///
/// For rollout column `t` this is `C·A^k·x_{t−k}` with `k = min(t, T1−1)`:
/// the free response of `x_0` while `t < T1`, and afterwards the state that
/// entered `T1 − 1` steps earlier.
fn hidden_state_term(dm: &DataMatrices, sys: &SystemModel, w: &Matrix) -> Result<Matrix> {
    let (m, q, t1, t2) = (sys.m(), sys.q(), dm.t1, dm.t2);
    let powers: Vec<Matrix> = std::iter::successors(Some(sys.c().clone()), |ca| Some(ca * sys.a()))
        .take(t1)
        .collect();
    let mut out = Matrix::zeros(sys.p(), dm.n_rollouts * t2);
    for (i, x0) in dm.initial_states.iter().enumerate() {
        let cols = i * t2;
        // The first block rows of U and W hold the raw sequences.
        let inputs = dm.u.view((0, cols), (m, t2)).into_owned();
        let noise = w.view((0, cols), (q, t2)).into_owned();
        let states = replay_states(sys, &inputs, &noise, x0)?;
        for t in 0..t2 {
            let k = t.min(t1 - 1);
            out.set_column(cols + t, &(&powers[k] * states.column(t - k)));
        }
    }
    Ok(out)
}

/// Verifies the closed-form error identity
///
/// ```text
/// Ĝ − G = (F·W + D_v·V + R)·U†
/// ```
///
/// where `R = H·X0` for `T1 = T2` (zero when every `x_0 = 0`) and the hidden
/// state term for `T1 < T2`. Returns the spectral norm of the difference
/// between the two sides.
pub fn error_decomposition_check(
    dm: &DataMatrices,
    sys: &SystemModel,
    g_hat: &MarkovMatrix,
) -> Result<f64> {
    let (w, v) = match (&dm.w, &dm.v) {
        (Some(w), Some(v)) => (w, v),
        _ => {
            return Err(SysIdError::IncompleteDataset(
                "error decomposition needs stored process and measurement noise".into(),
            ))
        }
    };
    if sys.m() != dm.input_dim() || sys.p() != dm.output_dim() || w.nrows() != sys.q() * dm.t1 {
        return Err(SysIdError::DimensionMismatch(
            "data matrices do not match the system dimensions".into(),
        ));
    }
    let g = true_markov(sys, dm.t1)?;
    let f = noise_markov_f(sys, dm.t1)?;
    let mut noise = f.block_row() * w + sys.dv() * v;
    if dm.t1 == dm.t2 {
        if let Some(x0) = &dm.x0 {
            let h = init_state_markov_h(sys, dm.t2)?;
            noise += h.block_row() * x0;
        }
    } else {
        noise += hidden_state_term(dm, sys, w)?;
    }
    let pinv = right_pseudo_inverse(&dm.u)?;
    let diff = (g_hat.block_row() - g.block_row()) - noise * pinv;
    Ok(spectral_norm_unchecked(&diff))
}
