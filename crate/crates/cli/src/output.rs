//! CSV output: result tables, dataset export, and plot-ready data.
//!
//! Files are written with explicit headers and shortest-round-trip float
//! formatting, so identical inputs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use opelab_core::mdp::{LayeredMdp, OfflineDataset};

use crate::experiments::{DistinguishRow, SweepRow, UpperBoundRow};
use crate::{CliError, Result};

pub const SWEEP_FILE: &str = "amplification.csv";
pub const DISTINGUISH_FILE: &str = "distinguish.csv";
pub const UPPERBOUND_FILE: &str = "upperbound.csv";
pub const FIG_RMSE_VS_H: &str = "fig_rmse_vs_h.csv";
pub const FIG_SUCCESS_VS_N: &str = "fig_success_vs_n.csv";
pub const FIG_BOUND_VS_EMPIRICAL: &str = "fig_bound_vs_empirical.csv";

/// Serialized row of the amplification sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRecord {
    pub d: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub r0: f64,
    pub lambda: f64,
    pub trials: usize,
    pub mean: f64,
    pub var: f64,
    pub rmse: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub seed: u64,
}

impl From<&SweepRow> for SweepRecord {
    fn from(row: &SweepRow) -> Self {
        Self {
            d: row.d,
            horizon: row.horizon,
            n: row.n,
            r0: row.r0,
            lambda: row.lambda,
            trials: row.trials,
            mean: row.mean,
            var: row.variance,
            rmse: row.rmse,
            q05: row.q05,
            q50: row.q50,
            q95: row.q95,
            seed: row.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DistinguishRecord {
    pub kind: String,
    pub d: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl From<&DistinguishRow> for DistinguishRecord {
    fn from(row: &DistinguishRow) -> Self {
        Self {
            kind: row.kind.to_string(),
            d: row.d,
            horizon: row.horizon,
            n: row.n,
            trials: row.trials,
            successes: row.successes,
            success_rate: row.success_rate,
            ci_lo: row.ci_lo,
            ci_hi: row.ci_hi,
            seed: row.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UpperBoundRecord {
    pub d: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub trials: usize,
    pub empirical_q: f64,
    pub bound: f64,
    pub shift_product: f64,
    pub vacuous: bool,
    pub pass: bool,
    pub seed: u64,
}

impl From<&UpperBoundRow> for UpperBoundRecord {
    fn from(row: &UpperBoundRow) -> Self {
        Self {
            d: row.d,
            horizon: row.horizon,
            n: row.n,
            delta: row.delta,
            epsilon: row.epsilon,
            lambda: row.lambda,
            trials: row.trials,
            empirical_q: row.empirical,
            bound: row.bound,
            shift_product: row.shift_product,
            vacuous: row.vacuous,
            pass: row.pass,
            seed: row.seed,
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    Ok(())
}

/// Writes records with an explicit header row; an empty slice yields a
/// header-only file.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let wrap = |source: csv::Error| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(header).map_err(wrap)?;
    for row in rows {
        writer.serialize(row).map_err(wrap)?;
    }
    writer.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row.map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?);
    }
    Ok(rows)
}

pub const SWEEP_HEADER: &[&str] = &[
    "d", "H", "N", "r0", "lambda", "trials", "mean", "var", "rmse", "q05", "q50", "q95", "seed",
];
pub const DISTINGUISH_HEADER: &[&str] = &[
    "kind",
    "d",
    "H",
    "N",
    "trials",
    "successes",
    "success_rate",
    "ci_lo",
    "ci_hi",
    "seed",
];
pub const UPPERBOUND_HEADER: &[&str] = &[
    "d",
    "H",
    "N",
    "delta",
    "epsilon",
    "lambda",
    "trials",
    "empirical_q",
    "bound",
    "shift_product",
    "vacuous",
    "pass",
    "seed",
];

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let records: Vec<SweepRecord> = rows.iter().map(SweepRecord::from).collect();
    write_csv(path, SWEEP_HEADER, &records)
}

pub fn write_distinguish_csv(path: &Path, rows: &[DistinguishRow]) -> Result<()> {
    let records: Vec<DistinguishRecord> = rows.iter().map(DistinguishRecord::from).collect();
    write_csv(path, DISTINGUISH_HEADER, &records)
}

pub fn write_upperbound_csv(path: &Path, rows: &[UpperBoundRow]) -> Result<()> {
    let records: Vec<UpperBoundRecord> = rows.iter().map(UpperBoundRecord::from).collect();
    write_csv(path, UPPERBOUND_HEADER, &records)
}

/// Dataset export: columns `level,s,a,r,s_next,trial`, levels 1-based,
/// states as level-major global ids, `s_next` empty at the last level.
pub fn write_dataset_csv(path: &Path, mdp: &LayeredMdp, datasets: &[OfflineDataset]) -> Result<()> {
    ensure_parent(path)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let wrap = |source: csv::Error| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer
        .write_record(["level", "s", "a", "r", "s_next", "trial"])
        .map_err(wrap)?;
    for (trial, dataset) in datasets.iter().enumerate() {
        for h in 0..dataset.horizon() {
            for t in dataset.samples(h) {
                let s_next = t
                    .next_state
                    .map(|s| mdp.global_id(h + 1, s).to_string())
                    .unwrap_or_default();
                writer
                    .write_record([
                        (h + 1).to_string(),
                        mdp.global_id(h, t.state).to_string(),
                        t.action.to_string(),
                        t.reward.to_string(),
                        s_next,
                        trial.to_string(),
                    ])
                    .map_err(wrap)?;
            }
        }
    }
    writer.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Tidy plot rows, one observation each.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RmseVsHRecord {
    pub d: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub r0: f64,
    pub lambda: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SuccessVsNRecord {
    pub kind: String,
    pub d: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundVsEmpiricalRecord {
    pub d: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub series: String,
    pub value: f64,
}

/// Emits the plot-ready files for whichever result tables are given.
/// Returns the paths written. Empty tables produce header-only files;
/// byte-stable given identical inputs.
pub fn emit_plot_data(
    out_dir: &Path,
    sweep: Option<&[SweepRecord]>,
    distinguish: Option<&[DistinguishRecord]>,
    upperbound: Option<&[UpperBoundRecord]>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    if let Some(rows) = sweep {
        let records: Vec<RmseVsHRecord> = rows
            .iter()
            .map(|r| RmseVsHRecord {
                d: r.d,
                horizon: r.horizon,
                n: r.n,
                r0: r.r0,
                lambda: r.lambda,
                rmse: r.rmse,
            })
            .collect();
        let path = out_dir.join(FIG_RMSE_VS_H);
        write_csv(&path, &["d", "H", "N", "r0", "lambda", "rmse"], &records)?;
        written.push(path);
    }

    if let Some(rows) = distinguish {
        let records: Vec<SuccessVsNRecord> = rows
            .iter()
            .map(|r| SuccessVsNRecord {
                kind: r.kind.clone(),
                d: r.d,
                horizon: r.horizon,
                n: r.n,
                success_rate: r.success_rate,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
            })
            .collect();
        let path = out_dir.join(FIG_SUCCESS_VS_N);
        write_csv(
            &path,
            &["kind", "d", "H", "N", "success_rate", "ci_lo", "ci_hi"],
            &records,
        )?;
        written.push(path);
    }

    if let Some(rows) = upperbound {
        let mut records = Vec::with_capacity(rows.len() * 2);
        for r in rows {
            records.push(BoundVsEmpiricalRecord {
                d: r.d,
                horizon: r.horizon,
                n: r.n,
                series: "empirical".into(),
                value: r.empirical_q,
            });
            records.push(BoundVsEmpiricalRecord {
                d: r.d,
                horizon: r.horizon,
                n: r.n,
                series: "bound".into(),
                value: r.bound,
            });
        }
        let path = out_dir.join(FIG_BOUND_VS_EMPIRICAL);
        write_csv(&path, &["d", "H", "N", "series", "value"], &records)?;
        written.push(path);
    }

    Ok(written)
}
