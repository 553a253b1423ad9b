use nalgebra::DVector;
use rayon::prelude::*;

use super::model::{NoiseConfig, SystemModel};
use crate::error::{Result, SysIdError};
use crate::numerics::Matrix;
use crate::rng::{gaussian, rollout_stream, Stream};

/// Any state entry above this magnitude aborts the simulation.
pub const OVERFLOW_LIMIT: f64 = 1e150;

/// One experiment of length `T2`, columns indexed by time.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    /// `m × T2`
    pub inputs: Matrix,
    /// `p × T2`
    pub outputs: Matrix,
    /// `q × T2`; absent for externally recorded data.
    pub process_noise: Option<Matrix>,
    /// `l × T2`; absent for externally recorded data.
    pub measurement_noise: Option<Matrix>,
    pub initial_state: DVector<f64>,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.ncols() == 0
    }

    pub fn has_noise_records(&self) -> bool {
        self.process_noise.is_some() && self.measurement_noise.is_some()
    }
}

/// `N` rollouts sharing a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutDataset {
    pub rollouts: Vec<Rollout>,
    pub system_tag: String,
    /// Generating system, when known.
    pub system: Option<SystemModel>,
    pub noise: NoiseConfig,
    pub seed: u64,
}

impl RolloutDataset {
    pub fn new(
        rollouts: Vec<Rollout>,
        system_tag: impl Into<String>,
        system: Option<SystemModel>,
        noise: NoiseConfig,
        seed: u64,
    ) -> Result<Self> {
        let first = rollouts
            .first()
            .ok_or_else(|| SysIdError::InvalidInput("dataset needs at least one rollout".into()))?;
        let (t2, m, p) = (first.len(), first.inputs.nrows(), first.outputs.nrows());
        if t2 == 0 {
            return Err(SysIdError::InvalidInput("rollouts must have length >= 1".into()));
        }
        for (i, r) in rollouts.iter().enumerate() {
            let shape_ok = r.len() == t2
                && r.outputs.ncols() == t2
                && r.inputs.nrows() == m
                && r.outputs.nrows() == p
                && r.process_noise.as_ref().is_none_or(|w| w.ncols() == t2)
                && r.measurement_noise.as_ref().is_none_or(|v| v.ncols() == t2);
            if !shape_ok {
                return Err(SysIdError::DimensionMismatch(format!(
                    "rollout {i} does not match the shape of rollout 0"
                )));
            }
        }
        if let Some(sys) = &system {
            if sys.m() != m || sys.p() != p {
                return Err(SysIdError::DimensionMismatch(
                    "rollout dimensions do not match the system".into(),
                ));
            }
        }
        Ok(Self {
            rollouts,
            system_tag: system_tag.into(),
            system,
            noise,
            seed,
        })
    }

    pub fn n_rollouts(&self) -> usize {
        self.rollouts.len()
    }

    /// Common rollout length `T2`.
    pub fn rollout_length(&self) -> usize {
        self.rollouts[0].len()
    }

    pub fn input_dim(&self) -> usize {
        self.rollouts[0].inputs.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.rollouts[0].outputs.nrows()
    }

    pub fn has_noise_records(&self) -> bool {
        self.rollouts.iter().all(Rollout::has_noise_records)
    }

    pub fn has_initial_states(&self) -> bool {
        self.rollouts
            .iter()
            .any(|r| r.initial_state.iter().any(|&x| x != 0.0))
    }
}

fn draw(rng: &mut Stream, rows: usize, cols: usize, sigma: f64) -> Matrix {
    // Column-major fill: time is the outer index.
    Matrix::from_fn(rows, cols, |_, _| gaussian(rng, sigma))
}

/// Simulates one rollout with Gaussian inputs.
///
/// Draw order on the stream is fixed: `x_0`, then every `u_t`, then every
/// `w_t`, then every `v_t`. All variates are drawn even when a std is zero,
/// so two configurations that differ only in noise levels share their inputs.
pub fn simulate_rollout(
    sys: &SystemModel,
    noise: &NoiseConfig,
    t2: usize,
    rng: &mut Stream,
) -> Result<Rollout> {
    if t2 == 0 {
        return Err(SysIdError::InvalidInput("rollout length must be at least 1".into()));
    }
    noise.validate()?;
    let x0 = DVector::from_fn(sys.n(), |_, _| gaussian(rng, noise.sigma_0));
    let inputs = draw(rng, sys.m(), t2, noise.sigma_u);
    let w = draw(rng, sys.q(), t2, noise.sigma_w);
    let v = draw(rng, sys.l(), t2, noise.sigma_v);
    run(sys, inputs, w, v, x0)
}

/// Simulates one rollout with caller-supplied inputs (`m × T2`); noises and
/// the initial state are still drawn from `rng`.
pub fn simulate_rollout_with_inputs(
    sys: &SystemModel,
    noise: &NoiseConfig,
    inputs: &Matrix,
    rng: &mut Stream,
) -> Result<Rollout> {
    let t2 = inputs.ncols();
    if t2 == 0 || inputs.nrows() != sys.m() {
        return Err(SysIdError::DimensionMismatch(format!(
            "inputs must be {}xT2 with T2 >= 1, got {}x{}",
            sys.m(),
            inputs.nrows(),
            t2
        )));
    }
    noise.validate()?;
    let x0 = DVector::from_fn(sys.n(), |_, _| gaussian(rng, noise.sigma_0));
    let w = draw(rng, sys.q(), t2, noise.sigma_w);
    let v = draw(rng, sys.l(), t2, noise.sigma_v);
    run(sys, inputs.clone(), w, v, x0)
}

fn run(sys: &SystemModel, inputs: Matrix, w: Matrix, v: Matrix, x0: DVector<f64>) -> Result<Rollout> {
    let states = replay_states(sys, &inputs, &w, &x0)?;
    let outputs = outputs_from_states(sys, &states, &inputs, &v);
    Ok(Rollout {
        inputs,
        outputs,
        process_noise: Some(w),
        measurement_noise: Some(v),
        initial_state: x0,
    })
}

/// States `x_0 … x_{T2−1}` as columns of an `n × T2` matrix.
pub fn replay_states(
    sys: &SystemModel,
    inputs: &Matrix,
    process_noise: &Matrix,
    x0: &DVector<f64>,
) -> Result<Matrix> {
    let t2 = inputs.ncols();
    let mut states = Matrix::zeros(sys.n(), t2);
    if t2 == 0 {
        return Ok(states);
    }
    states.set_column(0, x0);
    let mut x = x0.clone();
    for t in 0..t2 - 1 {
        x = sys.a() * &x + sys.b() * inputs.column(t) + sys.bw() * process_noise.column(t);
        if x.iter().any(|v| !(v.abs() <= OVERFLOW_LIMIT)) {
            return Err(SysIdError::InstabilityOverflow { time: t + 1 });
        }
        states.set_column(t + 1, &x);
    }
    Ok(states)
}

fn outputs_from_states(sys: &SystemModel, states: &Matrix, inputs: &Matrix, v: &Matrix) -> Matrix {
    sys.c() * states + sys.d() * inputs + sys.dv() * v
}

/// Recomputes a rollout's outputs from its stored inputs, noises and initial
/// state.
pub fn replay_outputs(sys: &SystemModel, rollout: &Rollout) -> Result<Matrix> {
    let (w, v) = match (&rollout.process_noise, &rollout.measurement_noise) {
        (Some(w), Some(v)) => (w, v),
        _ => {
            return Err(SysIdError::IncompleteDataset(
                "rollout has no stored noise sequences".into(),
            ))
        }
    };
    let states = replay_states(sys, &rollout.inputs, w, &rollout.initial_state)?;
    Ok(outputs_from_states(sys, &states, &rollout.inputs, v))
}

/// Simulates `n_rollouts` independent rollouts in parallel. Rollout `i` uses
/// stream `i` of `seed`, so the result does not depend on scheduling.
pub fn simulate_dataset(
    sys: &SystemModel,
    noise: &NoiseConfig,
    n_rollouts: usize,
    t2: usize,
    seed: u64,
    system_tag: impl Into<String>,
) -> Result<RolloutDataset> {
    if n_rollouts == 0 {
        return Err(SysIdError::InvalidInput("need at least one rollout".into()));
    }
    let rollouts = (0..n_rollouts)
        .into_par_iter()
        .map(|i| simulate_rollout(sys, noise, t2, &mut rollout_stream(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    RolloutDataset::new(rollouts, system_tag, Some(sys.clone()), *noise, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin::{newton, unstable_3x3};
    use crate::rng::stream;

    #[test]
    fn zero_noise_zero_input_gives_zero_output() {
        let noise = NoiseConfig::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let r = simulate_rollout(&newton(0.2), &noise, 8, &mut stream(1)).unwrap();
        assert!(r.outputs.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn newton_impulse_response() {
        let noise = NoiseConfig::noiseless(0.0);
        let mut u = Matrix::zeros(1, 4);
        u[(0, 0)] = 1.0;
        let r = simulate_rollout_with_inputs(&newton(0.2), &noise, &u, &mut stream(1)).unwrap();
        assert_eq!(r.outputs[(0, 0)], 0.0);
        assert_eq!(r.outputs[(0, 1)], 0.0);
        assert!((r.outputs[(0, 2)] - 0.2).abs() < 1e-15);
        assert!((r.outputs[(0, 3)] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn unstable_impulse_first_step() {
        let noise = NoiseConfig::noiseless(0.0);
        let mut u = Matrix::zeros(3, 3);
        u[(0, 0)] = 1.0;
        let r = simulate_rollout_with_inputs(&unstable_3x3(), &noise, &u, &mut stream(1)).unwrap();
        assert_eq!(r.outputs[(0, 0)], 0.0);
        assert_eq!(r.outputs[(0, 1)], 1.0);
    }

    #[test]
    fn overflow_is_reported_with_time_index() {
        let sys = newton(0.2).with_a(Matrix::from_element(2, 2, 1e80)).unwrap();
        let noise = NoiseConfig::noiseless(1.0);
        match simulate_rollout(&sys, &noise, 10, &mut stream(3)) {
            Err(SysIdError::InstabilityOverflow { time }) => assert!((2..10).contains(&time)),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn replay_reproduces_outputs() {
        let noise = NoiseConfig::new(1.0, 0.2, 0.5, 1.0).unwrap();
        let ds = simulate_dataset(&unstable_3x3(), &noise, 5, 12, 42, "unstable").unwrap();
        for r in &ds.rollouts {
            let y = replay_outputs(&unstable_3x3(), r).unwrap();
            assert!((y - &r.outputs).amax() <= 1e-12);
        }
    }

    #[test]
    fn dataset_is_deterministic() {
        let noise = NoiseConfig::new(1.0, 0.2, 0.5, 0.0).unwrap();
        let a = simulate_dataset(&newton(0.2), &noise, 20, 10, 9, "n").unwrap();
        let b = simulate_dataset(&newton(0.2), &noise, 20, 10, 9, "n").unwrap();
        assert_eq!(a, b);
        let c = simulate_dataset(&newton(0.2), &noise, 20, 10, 10, "n").unwrap();
        assert_ne!(a.rollouts[0].inputs, c.rollouts[0].inputs);
    }

    #[test]
    fn zero_length_rejected() {
        let noise = NoiseConfig::default();
        assert!(simulate_rollout(&newton(0.2), &noise, 0, &mut stream(0)).is_err());
    }
}
