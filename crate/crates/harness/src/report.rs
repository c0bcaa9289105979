//! Result serialization: one CSV of rows plus a JSON manifest describing the
//! run, both written with fixed formatting so identical runs produce
//! byte-identical files.

use std::fs;
use std::path::Path;

use augclust_core::error::{Error, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::rows::{ResultRow, CSV_HEADER};

pub const TOOL_NAME: &str = "augclust";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RowSummary {
    pub seed: u64,
    pub sweep_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seeds: Vec<u64>,
    pub rows: usize,
    pub passes: usize,
    pub failures: usize,
    pub row_summary: Vec<RowSummary>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn build(rows: &[ResultRow], cfg: &ExperimentConfig) -> Self {
        let passes = rows.iter().filter(|r| r.pass).count();
        Self {
            tool: TOOL_NAME.to_owned(),
            version: TOOL_VERSION.to_owned(),
            experiment: cfg.experiment.name().to_owned(),
            seeds: cfg.seeds.clone(),
            rows: rows.len(),
            passes,
            failures: rows.len() - passes,
            row_summary: rows
                .iter()
                .map(|r| RowSummary {
                    seed: r.seed,
                    sweep_value: r.sweep_value,
                    pass: r.pass,
                })
                .collect(),
            config: cfg.clone(),
        }
    }
}

pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .map_err(|e| Error::InvalidParameter(format!("csv header: {e}")))?;
    for row in rows {
        writer
            .write_record(row.to_record())
            .map_err(|e| Error::InvalidParameter(format!("csv row: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(format!("csv utf8: {e}")))
}

pub fn render_manifest(manifest: &Manifest) -> Result<String> {
    let body = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::InvalidParameter(format!("manifest json: {e}")))?;
    Ok(format!("{body}\n"))
}

/// Writes `results.csv` and `manifest.json` into `dir`, creating it if needed.
///
/// The manifest embeds the configuration as given, so rerunning the same
/// config into a different directory still produces identical bytes.
pub fn write_results(
    rows: &[ResultRow],
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<Manifest> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidParameter(format!("create {}: {e}", dir.display())))?;
    let csv_text = render_csv(rows)?;
    let manifest = Manifest::build(rows, cfg);
    let manifest_text = render_manifest(&manifest)?;
    let csv_path = dir.join("results.csv");
    let manifest_path = dir.join("manifest.json");
    fs::write(&csv_path, csv_text)
        .map_err(|e| Error::InvalidParameter(format!("write {}: {e}", csv_path.display())))?;
    fs::write(&manifest_path, manifest_text).map_err(|e| {
        Error::InvalidParameter(format!("write {}: {e}", manifest_path.display()))
    })?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rows::sort_rows;

    fn sample_rows() -> Vec<ResultRow> {
        let mut a = ResultRow::new("noise_sweep", 1, 2.0);
        a.epochs_baseline = Some(40);
        a.epochs_augmented = Some(31);
        a.pass = true;
        let b = ResultRow::failed("noise_sweep", 0, 4.0, "solver stalled".to_owned());
        vec![a, b]
    }

    #[test]
    fn csv_has_header_and_na_cells() {
        let rows = sample_rows();
        let text = render_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let first = lines.next().unwrap();
        assert!(first.starts_with("noise_sweep,1,2,40,31,"));
        let second = lines.next().unwrap();
        assert!(second.contains("solver stalled"));
        assert!(second.contains("NA"));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn empty_row_set_still_writes_the_header() {
        let text = render_csv(&[]).unwrap();
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn manifest_counts_passes_and_failures() {
        let cfg = ExperimentConfig::default();
        let rows = sample_rows();
        let manifest = Manifest::build(&rows, &cfg);
        assert_eq!(manifest.rows, 2);
        assert_eq!(manifest.passes, 1);
        assert_eq!(manifest.failures, 1);
        assert_eq!(manifest.tool, "augclust");
        let text = render_manifest(&manifest).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"experiment\""));
    }

    #[test]
    fn writing_twice_is_byte_identical() {
        let cfg = ExperimentConfig::default();
        let mut rows = sample_rows();
        sort_rows(&mut rows);
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a");
        let second = dir.path().join("b");
        write_results(&rows, &cfg, &first).unwrap();
        write_results(&rows, &cfg, &second).unwrap();
        let csv_a = fs::read(first.join("results.csv")).unwrap();
        let csv_b = fs::read(second.join("results.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
        let man_a = fs::read(first.join("manifest.json")).unwrap();
        let man_b = fs::read(second.join("manifest.json")).unwrap();
        assert_eq!(man_a, man_b);
    }
}
