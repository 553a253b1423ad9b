//! Closed-form error bounds and Monte Carlo checks of the concentration
//! inequalities behind them. Logarithms are natural.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SysIdError};
use crate::estimators::{assemble_data_matrices, ols_full};
use crate::lti::{init_state_markov_h, noise_markov_f, simulate_dataset, true_markov, NoiseConfig, SystemModel};
use crate::numerics::{min_eigenvalue_sym, spectral_norm, spectral_norm_unchecked};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Theorem1,
    Corollary2,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "N")]
    pub n_rollouts: usize,
    #[serde(rename = "N_threshold")]
    pub n_threshold: usize,
    /// `N ≥ N_threshold`; the bound is only guaranteed when this holds.
    pub valid: bool,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub bound_value: f64,
    #[serde(rename = "F_norm")]
    pub f_norm: f64,
    #[serde(rename = "Dv_norm")]
    pub dv_norm: f64,
    #[serde(rename = "H_norm")]
    pub h_norm: f64,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 13] = [
            ("bound", format!("{:?}", self.kind).to_lowercase()),
            ("delta", format!("{}", self.delta)),
            ("T", self.t.to_string()),
            ("N", self.n_rollouts.to_string()),
            ("N_threshold", self.n_threshold.to_string()),
            ("valid", self.valid.to_string()),
            ("C0", format!("{:.6e}", self.c0)),
            ("C1", format!("{:.6e}", self.c1)),
            ("C2", format!("{:.6e}", self.c2)),
            ("F_norm", format!("{:.6e}", self.f_norm)),
            ("Dv_norm", format!("{:.6e}", self.dv_norm)),
            ("H_norm", format!("{:.6e}", self.h_norm)),
            ("bound_value", format!("{:.6e}", self.bound_value)),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<14}{v:>16}")?;
        }
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SysIdError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_horizon(t: usize) -> Result<()> {
    if t == 0 {
        return Err(SysIdError::InvalidInput("T must be at least 1".into()));
    }
    Ok(())
}

/// `T³/3 + T²/2 + T/6 = Σ_{k=1}^{T} k²`.
fn cubic_sum(t: f64) -> f64 {
    t * t * t / 3.0 + t * t / 2.0 + t / 6.0
}

fn c1(dv_norm: f64, t: f64, m: f64, l: f64, log_term: f64) -> f64 {
    8.0 * dv_norm * (2.0 * t * (t + 1.0) * (m + l) * log_term).sqrt()
}

fn c2(f_norm: f64, t: f64, m: f64, q: f64, log_term: f64) -> f64 {
    16.0 * f_norm * (cubic_sum(t) * 2.0 * (m + q) * log_term).sqrt()
}

fn ceil_count(x: f64) -> usize {
    x.ceil().max(0.0) as usize
}

/// Bound on `‖Ĝ − G‖` for zero initial state, holding with probability at
/// least `1 − δ` once `N ≥ N_threshold`.
pub fn theorem1_bound(
    sys: &SystemModel,
    noise: &NoiseConfig,
    t: usize,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_delta(delta)?;
    check_horizon(t)?;
    noise.validate()?;
    let (tf, m, q, l) = (t as f64, sys.m() as f64, sys.q() as f64, sys.l() as f64);
    let f_norm = noise_markov_f(sys, t)?.spectral_norm();
    let dv_norm = spectral_norm(sys.dv())?;
    let log_term = (27.0 * tf / delta).ln();
    let c1 = c1(dv_norm, tf, m, l, log_term);
    let c2 = c2(f_norm, tf, m, q, log_term);
    let n_threshold = ceil_count(8.0 * m * tf + 4.0 * (m + q + l + 4.0) * (3.0 * tf / delta).ln());
    let bound_value = (noise.sigma_v * c1 + noise.sigma_w * c2) / (noise.sigma_u * (n as f64).sqrt());
    Ok(BoundReport {
        kind: BoundKind::Theorem1,
        delta,
        t,
        n_rollouts: n,
        n_threshold,
        valid: n >= n_threshold,
        c0: 0.0,
        c1,
        c2,
        bound_value,
        f_norm,
        dv_norm,
        h_norm: 0.0,
    })
}

/// As [`theorem1_bound`] with a random initial state of std `σ_0`.
pub fn corollary2_bound(
    sys: &SystemModel,
    noise: &NoiseConfig,
    t: usize,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_delta(delta)?;
    check_horizon(t)?;
    noise.validate()?;
    let (tf, m, q, l, nx) = (
        t as f64,
        sys.m() as f64,
        sys.q() as f64,
        sys.l() as f64,
        sys.n() as f64,
    );
    let f_norm = noise_markov_f(sys, t)?.spectral_norm();
    let dv_norm = spectral_norm(sys.dv())?;
    let h_norm = init_state_markov_h(sys, t)?.spectral_norm();
    let log_term = (36.0 * tf / delta).ln();
    let c0 = if noise.sigma_0 > 0.0 {
        16.0 * h_norm * (tf * (tf + 1.0) * (m + nx) * log_term).sqrt()
    } else {
        0.0
    };
    let c1 = c1(dv_norm, tf, m, l, log_term);
    let c2 = c2(f_norm, tf, m, q, log_term);
    let n_threshold =
        ceil_count(8.0 * m * tf + 4.0 * (m + nx + q + l + 4.0) * (4.0 * tf / delta).ln());
    let bound_value = (noise.sigma_0 * c0 + noise.sigma_v * c1 + noise.sigma_w * c2)
        / (noise.sigma_u * (n as f64).sqrt());
    Ok(BoundReport {
        kind: BoundKind::Corollary2,
        delta,
        t,
        n_rollouts: n,
        n_threshold,
        valid: n >= n_threshold,
        c0,
        c1,
        c2,
        bound_value,
        f_norm,
        dv_norm,
        h_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropId {
    P1,
    P2,
    P3,
    P4,
}

impl FromStr for PropId {
    type Err = SysIdError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches(['P', 'p']) {
            "1" => Ok(PropId::P1),
            "2" => Ok(PropId::P2),
            "3" => Ok(PropId::P3),
            "4" => Ok(PropId::P4),
            _ => Err(SysIdError::InvalidInput(format!("unknown proposition {s:?}"))),
        }
    }
}

impl PropId {
    /// Smallest real `N` at which the proposition is stated.
    pub fn threshold(self, sys: &SystemModel, t: usize, delta: f64) -> f64 {
        let (tf, m) = (t as f64, sys.m() as f64);
        let log = (tf / delta).ln();
        match self {
            PropId::P1 => 8.0 * m * tf + 16.0 * log,
            PropId::P2 => 2.0 * (m + sys.l() as f64) * log,
            PropId::P3 => 4.0 * (m + sys.q() as f64) * log,
            PropId::P4 => 4.0 * (sys.n() as f64 + m) * log,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConcentrationCheck {
    pub proposition_id: PropId,
    pub trials: usize,
    pub holds: usize,
    pub hold_fraction: f64,
    pub delta: f64,
    #[serde(rename = "N")]
    pub n_rollouts: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub threshold_inequality_satisfied: bool,
}

impl fmt::Display for ConcentrationCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14}{:>16}", "proposition", format!("{:?}", self.proposition_id))?;
        writeln!(f, "{:<14}{:>16}", "N", self.n_rollouts)?;
        writeln!(f, "{:<14}{:>16}", "T", self.t)?;
        writeln!(f, "{:<14}{:>16}", "delta", self.delta)?;
        writeln!(f, "{:<14}{:>16}", "threshold_ok", self.threshold_inequality_satisfied)?;
        writeln!(f, "{:<14}{:>16}", "trials", self.trials)?;
        writeln!(f, "{:<14}{:>16}", "holds", self.holds)?;
        writeln!(f, "{:<14}{:>16.4}", "hold_fraction", self.hold_fraction)
    }
}

/// Monte Carlo frequency with which a concentration inequality holds over
/// `trials` independent datasets of `N` rollouts of length `T`.
#[allow(clippy::too_many_arguments)]
pub fn check_proposition(
    prop: PropId,
    sys: &SystemModel,
    noise: &NoiseConfig,
    t: usize,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationCheck> {
    check_delta(delta)?;
    check_horizon(t)?;
    noise.validate()?;
    if trials < 1 {
        return Err(SysIdError::InvalidInput("trials must be at least 1".into()));
    }
    let (tf, nf, m) = (t as f64, n as f64, sys.m() as f64);
    let log9 = (9.0 * tf / delta).ln();
    let su = noise.sigma_u;
    let rhs = match prop {
        PropId::P1 => su * su * nf / 4.0,
        PropId::P2 => {
            2.0 * noise.sigma_v * su * (2.0 * tf * (tf + 1.0) * nf * (m + sys.l() as f64) * log9).sqrt()
        }
        PropId::P3 => {
            4.0 * noise.sigma_w * su * (cubic_sum(tf) * 2.0 * nf * (m + sys.q() as f64) * log9).sqrt()
        }
        PropId::P4 => {
            4.0 * noise.sigma_0 * su * (tf * (tf + 1.0) * nf * (m + sys.n() as f64) * log9).sqrt()
        }
    };

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let ds = simulate_dataset(sys, noise, n, t, derive_seed(seed, &[trial as u64]), "check")?;
            let dm = assemble_data_matrices(&ds, t)?;
            let ut = dm.u.transpose();
            Ok(match prop {
                PropId::P1 => min_eigenvalue_sym(&dm.uut())? >= rhs,
                PropId::P2 => spectral_norm_unchecked(&(dm.v.as_ref().unwrap() * &ut)) <= rhs,
                PropId::P3 => spectral_norm_unchecked(&(dm.w.as_ref().unwrap() * &ut)) <= rhs,
                PropId::P4 => match &dm.x0 {
                    Some(x0) => spectral_norm_unchecked(&(x0 * &ut)) <= rhs,
                    None => true,
                },
            })
        })
        .collect::<Result<Vec<bool>>>()?;
    let holds = outcomes.iter().filter(|&&h| h).count();
    Ok(ConcentrationCheck {
        proposition_id: prop,
        trials,
        holds,
        hold_fraction: holds as f64 / trials as f64,
        delta,
        n_rollouts: n,
        t,
        threshold_inequality_satisfied: nf >= prop.threshold(sys, t, delta),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoverageReport {
    pub bound: BoundReport,
    pub trials: usize,
    pub covered: usize,
    pub coverage: f64,
    pub max_error: f64,
    pub mean_error: f64,
}

/// Fraction of `trials` datasets whose full-data OLS error stays below the
/// high-probability bound ([`theorem1_bound`] when `σ_0 = 0`, [`corollary2_bound`] otherwise).
#[allow(clippy::too_many_arguments)]
pub fn check_bound_coverage(
    sys: &SystemModel,
    noise: &NoiseConfig,
    t: usize,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if trials < 1 {
        return Err(SysIdError::InvalidInput("trials must be at least 1".into()));
    }
    let bound = if noise.sigma_0 > 0.0 {
        corollary2_bound(sys, noise, t, n, delta)?
    } else {
        theorem1_bound(sys, noise, t, n, delta)?
    };
    let g = true_markov(sys, t)?;
    let errors = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let ds = simulate_dataset(sys, noise, n, t, derive_seed(seed, &[trial as u64]), "coverage")?;
            let est = ols_full(&assemble_data_matrices(&ds, t)?)?;
            est.g_hat.distance(&g)
        })
        .collect::<Result<Vec<f64>>>()?;
    let covered = errors.iter().filter(|&&e| e <= bound.bound_value).count();
    Ok(CoverageReport {
        trials,
        covered,
        coverage: covered as f64 / trials as f64,
        max_error: errors.iter().copied().fold(0.0, f64::max),
        mean_error: errors.iter().sum::<f64>() / trials as f64,
        bound,
    })
}
