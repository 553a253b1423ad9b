use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Result, SysIdError};
use crate::lti::RolloutDataset;
use crate::numerics::Matrix;

/// Stacked regression data for `N` rollouts of length `T2`, regressing on
/// `T1 ≤ T2` Markov blocks.
#[derive(Debug, Clone)]
pub struct DataMatrices {
    /// `p × N·T2`
    pub y: Matrix,
    /// `m·T1 × N·T2`, block upper-triangular Toeplitz per rollout.
    pub u: Matrix,
    /// `q·T1 × N·T2`, same structure as `u`; present when noises are recorded.
    pub w: Option<Matrix>,
    /// `l × N·T2`
    pub v: Option<Matrix>,
    /// `n·T2 × N·T2` with per-rollout blocks `I_{T2} ⊗ x_0`; present only when
    /// some initial state is non-zero.
    pub x0: Option<Matrix>,
    pub initial_states: Vec<DVector<f64>>,
    pub t1: usize,
    pub t2: usize,
    pub n_rollouts: usize,
    /// Input std from the generating configuration (for the rank cutoff).
    pub sigma_u: f64,
}

impl DataMatrices {
    pub fn input_dim(&self) -> usize {
        self.u.nrows() / self.t1
    }

    pub fn output_dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn uut(&self) -> Matrix {
        &self.u * self.u.transpose()
    }
}

/// Upper-triangular block Toeplitz matrix of a `d × T2` sequence with `t1`
/// block rows: block `(j, k)` is `s_{k−j}` for `k ≥ j`, zero otherwise.
pub fn toeplitz_block(seq: &Matrix, t1: usize) -> Matrix {
    let (d, t2) = seq.shape();
    let mut out = Matrix::zeros(d * t1, t2);
    for j in 0..t1 {
        for k in j..t2 {
            out.view_mut((j * d, k), (d, 1)).copy_from(&seq.column(k - j));
        }
    }
    out
}

fn hconcat(blocks: Vec<Matrix>) -> Matrix {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(Matrix::ncols).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), b.shape()).copy_from(&b);
        c += b.ncols();
    }
    out
}

/// `I_{T2} ⊗ x_0`, an `n·T2 × T2` block diagonal.
pub fn kron_identity(x0: &DVector<f64>, t2: usize) -> Matrix {
    let n = x0.len();
    let mut out = Matrix::zeros(n * t2, t2);
    for t in 0..t2 {
        out.view_mut((t * n, t), (n, 1)).copy_from(x0);
    }
    out
}

/// Builds `Y`, `U`, `W`, `V` (and `X0`) from a dataset.
///
/// With `T1 = T2` the per-rollout `U` blocks are square block-Toeplitz; with
/// `T1 < T2` each block keeps all `T2` columns and only the first `T1` block
/// rows.
pub fn assemble_data_matrices(ds: &RolloutDataset, t1: usize) -> Result<DataMatrices> {
    let t2 = ds.rollout_length();
    if t1 == 0 {
        return Err(SysIdError::InvalidInput("T1 must be at least 1".into()));
    }
    if t1 > t2 {
        return Err(SysIdError::LengthOrder { t1, t2 });
    }
    let with_noise = ds.has_noise_records();
    let with_x0 = ds.has_initial_states();

    // Per-rollout blocks are independent; concatenation is by rollout index.
    let blocks: Vec<_> = ds
        .rollouts
        .par_iter()
        .map(|r| {
            let u = toeplitz_block(&r.inputs, t1);
            let w = with_noise.then(|| toeplitz_block(r.process_noise.as_ref().unwrap(), t1));
            let x0 = with_x0.then(|| kron_identity(&r.initial_state, t2));
            (u, w, x0)
        })
        .collect();

    let mut us = Vec::with_capacity(blocks.len());
    let mut ws = Vec::new();
    let mut xs = Vec::new();
    for (u, w, x0) in blocks {
        us.push(u);
        ws.extend(w);
        xs.extend(x0);
    }

    let y = hconcat(ds.rollouts.iter().map(|r| r.outputs.clone()).collect());
    let v = with_noise.then(|| {
        hconcat(
            ds.rollouts
                .iter()
                .map(|r| r.measurement_noise.clone().unwrap())
                .collect(),
        )
    });

    Ok(DataMatrices {
        y,
        u: hconcat(us),
        w: with_noise.then(|| hconcat(ws)),
        v,
        x0: with_x0.then(|| hconcat(xs)),
        initial_states: ds.rollouts.iter().map(|r| r.initial_state.clone()).collect(),
        t1,
        t2,
        n_rollouts: ds.n_rollouts(),
        sigma_u: ds.noise.sigma_u,
    })
}
