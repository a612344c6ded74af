//! Plot-ready CSV and JSON outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::config::ConfigValues;
use crate::error::{Error, Result};
use crate::harness::{CurvePoint, MetricsAggregate, SummaryRow};

pub const CURVES_HEADER: [&str; 4] = ["level", "task_index", "mean_success_rate", "sample_count"];
pub const ONSETS_HEADER: [&str; 5] = ["level", "runs", "p5", "p50", "p95"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub label: String,
    pub config: ConfigValues,
}

/// Everything needed to reproduce a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub runs: Vec<ManifestRun>,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub manifest: RunManifest,
    pub rows: Vec<SummaryRow>,
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(csv_error(path))
}

/// One row per (level, task_index) point, sorted by level then index.
pub fn write_curves_csv(aggregate: &MetricsAggregate, path: &Path) -> Result<()> {
    let mut out = csv_writer(path)?;
    out.write_record(CURVES_HEADER).map_err(csv_error(path))?;
    let mut curves: Vec<_> = aggregate.level_curves.iter().collect();
    curves.sort_by_key(|c| c.level);
    for curve in curves {
        for point in &curve.points {
            out.write_record([
                curve.level.to_string(),
                point.task_index.to_string(),
                format!("{:.6}", point.mean_success_rate),
                point.sample_count.to_string(),
            ])
            .map_err(csv_error(path))?;
        }
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a curves file back as `(level, point)` rows.
pub fn read_curves_csv(path: &Path) -> Result<Vec<(u8, CurvePoint)>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    reader
        .deserialize::<(u8, u32, f64, u64)>()
        .map(|row| {
            let (level, task_index, mean_success_rate, sample_count) =
                row.map_err(csv_error(path))?;
            Ok((
                level,
                CurvePoint {
                    task_index,
                    mean_success_rate,
                    sample_count,
                },
            ))
        })
        .collect()
}

/// First-attempt percentiles per level.
pub fn write_onsets_csv(aggregate: &MetricsAggregate, path: &Path) -> Result<()> {
    let mut out = csv_writer(path)?;
    out.write_record(ONSETS_HEADER).map_err(csv_error(path))?;
    for onset in &aggregate.level_onsets {
        out.write_record([
            onset.level.to_string(),
            onset.runs.to_string(),
            onset.p5.to_string(),
            onset.p50.to_string(),
            onset.p95.to_string(),
        ])
        .map_err(csv_error(path))?;
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_summary_json(rows: &[SummaryRow], manifest: &RunManifest, path: &Path) -> Result<()> {
    let doc = SummaryDocument {
        manifest: manifest.clone(),
        rows: rows.to_vec(),
    };
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    writeln!(out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn read_summary_json(path: &Path) -> Result<SummaryDocument> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{LevelCurve, Moments};

    fn aggregate(curves: Vec<LevelCurve>) -> MetricsAggregate {
        MetricsAggregate {
            level_curves: curves,
            final_expected_level: Moments {
                mean: 1.0,
                std: 0.0,
                count: 1,
            },
            level_onsets: Vec::new(),
            attempts: 0,
            successes: 0,
        }
    }

    #[test]
    fn empty_aggregate_writes_only_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        write_curves_csv(&aggregate(Vec::new()), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "level,task_index,mean_success_rate,sample_count\n"
        );
    }

    #[test]
    fn single_point_row_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        let curve = LevelCurve {
            level: 1,
            points: vec![CurvePoint {
                task_index: 0,
                mean_success_rate: 1.0,
                sample_count: 2,
            }],
        };
        write_curves_csv(&aggregate(vec![curve]), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().collect::<Vec<_>>(),
            [
                "level,task_index,mean_success_rate,sample_count",
                "1,0,1.000000,2"
            ]
        );
    }

    #[test]
    fn unwritable_path_reports_the_path() {
        let err = write_curves_csv(
            &aggregate(Vec::new()),
            Path::new("/nonexistent-dir/x/curves.csv"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x/curves.csv"));
    }
}
