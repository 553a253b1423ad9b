//! On-disk dataset format.
//!
//! A dataset is a directory holding `metadata.json` plus one CSV per rollout.
//! Each CSV has a mandatory header `t,u_1..u_m,y_1..y_p,w_1..w_q,v_1..v_l`
//! (the `w`/`v` columns are omitted for data without noise records) and
//! floats are written with 17 significant digits so values round-trip exactly.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::model::{NoiseConfig, SystemModel};
use super::simulate::{Rollout, RolloutDataset};
use crate::error::{Result, SysIdError};
use crate::numerics::Matrix;

pub const FORMAT_VERSION: &str = "1";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub format_version: String,
    pub system_tag: String,
    pub system: Option<SystemModel>,
    pub noise: NoiseConfig,
    pub n_rollouts: usize,
    pub rollout_length: usize,
    pub seed: u64,
    pub state_dim: usize,
    pub initial_states: Vec<Vec<f64>>,
    pub rollout_files: Vec<String>,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn rollout_file_name(i: usize) -> String {
    format!("rollout_{i:05}.csv")
}

pub fn save_dataset(ds: &RolloutDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let with_noise = ds.has_noise_records();
    let mut files = Vec::with_capacity(ds.n_rollouts());
    for (i, r) in ds.rollouts.iter().enumerate() {
        let name = rollout_file_name(i);
        write_rollout_csv(r, with_noise, &dir.join(&name))?;
        files.push(name);
    }
    let meta = DatasetMetadata {
        format_version: FORMAT_VERSION.into(),
        system_tag: ds.system_tag.clone(),
        system: ds.system.clone(),
        noise: ds.noise,
        n_rollouts: ds.n_rollouts(),
        rollout_length: ds.rollout_length(),
        seed: ds.seed,
        state_dim: ds.rollouts[0].initial_state.len(),
        initial_states: ds
            .rollouts
            .iter()
            .map(|r| r.initial_state.as_slice().to_vec())
            .collect(),
        rollout_files: files,
    };
    fs::write(dir.join(METADATA_FILE), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn write_rollout_csv(r: &Rollout, with_noise: bool, path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t".to_string()];
    let mut blocks: Vec<(&str, &Matrix)> = vec![("u", &r.inputs), ("y", &r.outputs)];
    if with_noise {
        blocks.push(("w", r.process_noise.as_ref().expect("noise records checked")));
        blocks.push(("v", r.measurement_noise.as_ref().expect("noise records checked")));
    }
    for (prefix, m) in &blocks {
        header.extend((1..=m.nrows()).map(|k| format!("{prefix}_{k}")));
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for t in 0..r.len() {
        let mut rec = vec![t.to_string()];
        for (_, m) in &blocks {
            rec.extend(m.column(t).iter().map(|&x| fmt_f64(x)));
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> SysIdError {
    SysIdError::Parse(e.to_string())
}

pub fn load_dataset(dir: &Path) -> Result<RolloutDataset> {
    let meta: DatasetMetadata = serde_json::from_str(&fs::read_to_string(dir.join(METADATA_FILE))?)?;
    if meta.format_version != FORMAT_VERSION {
        return Err(SysIdError::Parse(format!(
            "unsupported dataset format version {:?}",
            meta.format_version
        )));
    }
    if meta.rollout_files.len() != meta.n_rollouts {
        return Err(SysIdError::Parse(format!(
            "metadata lists {} files for {} rollouts",
            meta.rollout_files.len(),
            meta.n_rollouts
        )));
    }
    let mut rollouts = Vec::with_capacity(meta.n_rollouts);
    for (i, name) in meta.rollout_files.iter().enumerate() {
        let x0 = match meta.initial_states.get(i) {
            Some(v) => DVector::from_column_slice(v),
            None => DVector::zeros(meta.state_dim),
        };
        let r = read_rollout_csv(&dir.join(name), x0)?;
        if r.len() != meta.rollout_length {
            return Err(SysIdError::Parse(format!(
                "{name}: expected {} rows, found {}",
                meta.rollout_length,
                r.len()
            )));
        }
        rollouts.push(r);
    }
    RolloutDataset::new(rollouts, meta.system_tag, meta.system, meta.noise, meta.seed)
}

fn read_rollout_csv(path: &Path, initial_state: DVector<f64>) -> Result<Rollout> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("t") {
        return Err(SysIdError::Parse(format!(
            "{}: first column must be 't'",
            path.display()
        )));
    }
    let mut cols: [Vec<usize>; 4] = Default::default();
    for (j, name) in header.iter().enumerate().skip(1) {
        let slot = match name.split('_').next() {
            Some("u") => 0,
            Some("y") => 1,
            Some("w") => 2,
            Some("v") => 3,
            _ => {
                return Err(SysIdError::Parse(format!(
                    "{}: unexpected column {name:?}",
                    path.display()
                )))
            }
        };
        cols[slot].push(j);
    }
    if cols[0].is_empty() || cols[1].is_empty() {
        return Err(SysIdError::Parse(format!(
            "{}: need at least one u and one y column",
            path.display()
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let vals = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| SysIdError::Parse(format!("{}: {s:?}: {e}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    let t2 = rows.len();
    let gather = |idx: &[usize]| Matrix::from_fn(idx.len(), t2, |i, t| rows[t][idx[i]]);
    let noise = |idx: &[usize]| (!idx.is_empty()).then(|| gather(idx));
    Ok(Rollout {
        inputs: gather(&cols[0]),
        outputs: gather(&cols[1]),
        process_noise: noise(&cols[2]),
        measurement_noise: noise(&cols[3]),
        initial_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin::unstable_3x3;
    use crate::lti::simulate::simulate_dataset;

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let noise = NoiseConfig::new(1.0, 0.2, 0.5, 0.3).unwrap();
        let ds = simulate_dataset(&unstable_3x3(), &noise, 4, 7, 11, "unstable_3x3").unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("rollout_00000.csv")).unwrap();
        assert!(text.starts_with("t,u_1,u_2,u_3,y_1,w_1,w_2,w_3,v_1\n"));
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn loads_data_without_noise_columns() {
        let dir = tempfile::tempdir().unwrap();
        let noise = NoiseConfig::noiseless(1.0);
        let mut ds = simulate_dataset(&unstable_3x3(), &noise, 2, 3, 1, "ext").unwrap();
        for r in &mut ds.rollouts {
            r.process_noise = None;
            r.measurement_noise = None;
        }
        ds.system = None;
        save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert!(!back.has_noise_records());
        assert_eq!(back.rollouts[1].outputs, ds.rollouts[1].outputs);
    }

    #[test]
    fn rejects_unknown_version() {
        let dir = tempfile::tempdir().unwrap();
        let ds = simulate_dataset(&unstable_3x3(), &NoiseConfig::default(), 1, 2, 1, "x").unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let p = dir.path().join(METADATA_FILE);
        let text = fs::read_to_string(&p).unwrap().replace("\"1\"", "\"9\"");
        fs::write(&p, text).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(SysIdError::Parse(_))));
    }
}
