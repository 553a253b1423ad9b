use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ols::EstimationResult;
use crate::error::{Result, SysIdError};
use crate::lti::dataset_io::fmt_f64;
use crate::lti::MarkovMatrix;
use crate::numerics::Matrix;

/// JSON sidecar written next to an estimate CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimateSidecar {
    pub method_tag: String,
    #[serde(rename = "N")]
    pub n_rollouts: usize,
    #[serde(rename = "T1")]
    pub t1: usize,
    #[serde(rename = "T2")]
    pub t2: usize,
    pub block_width: usize,
    pub spectral_error: Option<f64>,
    pub normalized_error: Option<f64>,
    #[serde(rename = "min_eig_UUT")]
    pub min_eig_uut: f64,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the estimate as a headerless `p × mT1` CSV (17 significant digits)
/// plus its JSON sidecar.
pub fn write_estimate(result: &EstimationResult, csv_path: &Path) -> Result<()> {
    write_markov_csv(&result.g_hat, csv_path)?;
    let sidecar = EstimateSidecar {
        method_tag: result.method.tag().into(),
        n_rollouts: result.n_rollouts,
        t1: result.t1,
        t2: result.t2,
        block_width: result.g_hat.block_width(),
        spectral_error: result.spectral_error,
        normalized_error: result.normalized_error,
        min_eig_uut: result.min_eig_uut,
    };
    fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn write_markov_csv(g: &MarkovMatrix, path: &Path) -> Result<()> {
    let mut text = String::new();
    for row in g.block_row().row_iter() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn read_markov_csv(path: &Path, block_width: usize) -> Result<MarkovMatrix> {
    let text = fs::read_to_string(path)?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| SysIdError::Parse(format!("{}: {s:?}: {e}", path.display())))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m: Matrix = crate::serde_matrix::from_rows(&rows).map_err(SysIdError::Parse)?;
    MarkovMatrix::new(m, block_width)
}

/// Reads an estimate CSV, taking the block width from its sidecar.
pub fn read_estimate(csv_path: &Path) -> Result<(MarkovMatrix, EstimateSidecar)> {
    let sidecar: EstimateSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
    let g = read_markov_csv(csv_path, sidecar.block_width)?;
    Ok((g, sidecar))
}
