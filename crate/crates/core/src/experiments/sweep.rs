use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::builtin::rescale_to_radius;
use super::config::{Metric, ScenarioConfig, Sweep};
use super::plot::render_svg;
use crate::error::{Result, SysIdError};
use crate::estimators::{assemble_data_matrices, ols_final_sample, ols_full, ols_unequal_length, Method};
use crate::lti::dataset_io::fmt_f64;
use crate::lti::{simulate_dataset, true_markov, MarkovMatrix, RolloutDataset, SystemModel};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub axis_index: usize,
    pub axis: f64,
    pub method: Method,
    pub seed: usize,
    pub error: f64,
    pub normalized_error: f64,
}

impl CellRecord {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Error => self.error,
            Metric::NormalizedError => self.normalized_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingCell {
    pub axis_index: usize,
    pub axis: f64,
    pub method: Method,
    pub seed: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub axis: f64,
    pub method: Method,
    /// NaN when every seed at this cell is missing.
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis_label: String,
    pub axis_values: Vec<f64>,
    pub methods: Vec<Method>,
    pub metric: Metric,
    pub records: Vec<CellRecord>,
    pub missing: Vec<MissingCell>,
    pub summary: Vec<SummaryRow>,
}

impl SweepResult {
    pub fn summary_for(&self, method: Method) -> Vec<&SummaryRow> {
        self.summary.iter().filter(|r| r.method == method).collect()
    }

    /// Means of `method` in axis order.
    pub fn means(&self, method: Method) -> Vec<f64> {
        self.summary_for(method).iter().map(|r| r.mean).collect()
    }
}

fn estimate(method: Method, ds: &RolloutDataset, t1: usize) -> Result<MarkovMatrix> {
    let t2 = ds.rollout_length();
    let g = match method {
        Method::Full => ols_full(&assemble_data_matrices(ds, t2)?)?.g_hat,
        Method::UnequalLength => ols_unequal_length(&assemble_data_matrices(ds, t1)?)?.g_hat,
        Method::FinalSample => ols_final_sample(ds)?.g_hat,
    };
    if g.horizon() == t1 {
        Ok(g)
    } else {
        g.truncate(t1)
    }
}

type CellOutcome = Vec<std::result::Result<CellRecord, MissingCell>>;

fn run_cell(
    cfg: &ScenarioConfig,
    sys: &Result<SystemModel>,
    axis_index: usize,
    axis: f64,
    seed_index: usize,
) -> CellOutcome {
    let (n, t2, t1) = cfg.sweep.cell(axis_index);
    let missing = |method: Method, e: &SysIdError| MissingCell {
        axis_index,
        axis,
        method,
        seed: seed_index,
        reason: e.to_string(),
    };
    let prepared = sys.as_ref().map_err(|e| SysIdError::NumericFailure(e.to_string())).and_then(|sys| {
        let seed = derive_seed(cfg.root_seed, &[axis_index as u64, seed_index as u64]);
        let ds = simulate_dataset(sys, &cfg.noise, n, t2, seed, "sweep")?;
        let g = true_markov(sys, t1)?;
        Ok((ds, g))
    });
    let (ds, g) = match prepared {
        Ok(v) => v,
        Err(e) => return cfg.methods.iter().map(|&m| Err(missing(m, &e))).collect(),
    };
    let scale = g.spectral_norm();
    cfg.methods
        .iter()
        .map(|&method| {
            let g_hat = estimate(method, &ds, t1).map_err(|e| missing(method, &e))?;
            let error = g_hat.distance(&g).map_err(|e| missing(method, &e))?;
            Ok(CellRecord {
                axis_index,
                axis,
                method,
                seed: seed_index,
                error,
                normalized_error: if scale > 0.0 { error / scale } else { error },
            })
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, var.sqrt())
}

/// Runs every `(axis value, seed)` cell of the scenario and aggregates the
/// per-method errors. Cells that fail numerically are recorded as missing.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let base = cfg.system.build()?;
    let axis_values = cfg.sweep.axis_values();
    let systems: Vec<Result<SystemModel>> = axis_values
        .iter()
        .map(|&v| match cfg.sweep {
            Sweep::Rho { .. } => rescale_to_radius(&base, v),
            _ => Ok(base.clone()),
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..axis_values.len())
        .flat_map(|a| (0..cfg.seeds).map(move |s| (a, s)))
        .collect();
    let work = || -> Vec<CellOutcome> {
        jobs.par_iter()
            .map(|&(a, s)| run_cell(cfg, &systems[a], a, axis_values[a], s))
            .collect()
    };
    let outcomes = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| SysIdError::InvalidConfig(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut records = Vec::new();
    let mut missing = Vec::new();
    for o in outcomes.into_iter().flatten() {
        match o {
            Ok(r) => records.push(r),
            Err(m) => missing.push(m),
        }
    }
    let order = |m: Method| cfg.methods.iter().position(|&x| x == m).unwrap();
    records.sort_by_key(|r| (r.axis_index, order(r.method), r.seed));
    missing.sort_by_key(|r| (r.axis_index, order(r.method), r.seed));

    let mut summary = Vec::new();
    for (a, &axis) in axis_values.iter().enumerate() {
        for &method in &cfg.methods {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.axis_index == a && r.method == method)
                .map(|r| r.metric(cfg.metric))
                .collect();
            let (mean, std) = mean_std(&vals);
            summary.push(SummaryRow {
                axis,
                method,
                mean,
                std,
                count: vals.len(),
            });
        }
    }

    Ok(SweepResult {
        axis_label: cfg.sweep.axis_label().to_string(),
        axis_values,
        methods: cfg.methods.clone(),
        metric: cfg.metric,
        records,
        missing,
        summary,
    })
}

pub fn results_csv(res: &SweepResult) -> String {
    let mut out = String::from("axis,method,seed,error,normalized_error\n");
    for r in &res.records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.axis,
            r.method,
            r.seed,
            fmt_f64(r.error),
            fmt_f64(r.normalized_error)
        ));
    }
    out
}

pub fn summary_csv(res: &SweepResult) -> String {
    let mut out = String::from("axis,method,mean,std\n");
    for r in &res.summary {
        out.push_str(&format!("{},{},{},{}\n", r.axis, r.method, fmt_f64(r.mean), fmt_f64(r.std)));
    }
    out
}

pub fn missing_csv(res: &SweepResult) -> String {
    let mut out = String::from("axis,method,seed,reason\n");
    for m in &res.missing {
        out.push_str(&format!("{},{},{},\"{}\"\n", m.axis, m.method, m.seed, m.reason.replace('"', "'")));
    }
    out
}

/// Writes `results.csv`, `summary.csv`, `plot.svg`, and `missing.csv` when
/// some cells failed.
pub fn write_sweep_outputs(res: &SweepResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(res))?;
    fs::write(dir.join("summary.csv"), summary_csv(res))?;
    fs::write(dir.join("plot.svg"), render_svg(res))?;
    let missing_path = dir.join("missing.csv");
    if res.missing.is_empty() {
        if missing_path.exists() {
            fs::remove_file(missing_path)?;
        }
    } else {
        fs::write(missing_path, missing_csv(res))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ScenarioConfig {
        ScenarioConfig::from_json(
            r#"{
                "system": {"newton_delta": 0.2},
                "noise": {"sigma_u": 1.0, "sigma_w": 0.2, "sigma_v": 0.5},
                "sweep": {"kind": "n", "values": [20, 40], "t": 5},
                "methods": ["full", "final_sample"],
                "seeds": 3
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_and_consistent() {
        let cfg = small_cfg();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(results_csv(&a), results_csv(&b));
        assert_eq!(summary_csv(&a), summary_csv(&b));
        assert_eq!(a.summary.len(), 4);
        for row in &a.summary {
            let raws: Vec<f64> = a
                .records
                .iter()
                .filter(|r| r.axis == row.axis && r.method == row.method)
                .map(|r| r.normalized_error)
                .collect();
            let mean = raws.iter().sum::<f64>() / raws.len() as f64;
            assert!((mean - row.mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut cfg = small_cfg();
        let a = results_csv(&run_sweep(&cfg).unwrap());
        cfg.workers = Some(1);
        assert_eq!(a, results_csv(&run_sweep(&cfg).unwrap()));
    }

    #[test]
    fn under_excited_cells_are_missing() {
        let mut cfg = small_cfg();
        // Final-sample needs N >= mT = 5 rollouts.
        cfg.sweep = Sweep::N { values: vec![3, 40], t: 5 };
        let res = run_sweep(&cfg).unwrap();
        assert!(res.missing.iter().any(|m| m.method == Method::FinalSample && m.axis == 3.0));
        let row = res.summary_for(Method::FinalSample)[0];
        assert_eq!(row.count, 0);
        assert!(row.mean.is_nan());
    }

    #[test]
    fn outputs_written() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_sweep(&small_cfg()).unwrap();
        write_sweep_outputs(&res, dir.path()).unwrap();
        let results = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert!(results.starts_with("axis,method,seed,error,normalized_error\n"));
        assert_eq!(results.lines().count(), 1 + 2 * 2 * 3);
        let svg = fs::read_to_string(dir.path().join("plot.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }
}
