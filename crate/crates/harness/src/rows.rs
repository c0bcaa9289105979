//! The fixed result-row schema shared by every experiment.
//!
//! Columns are identical across experiments; cells that do not apply hold the
//! `NA` sentinel so downstream tools never face missing fields.

use serde::Serialize;

pub const NA: &str = "NA";

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "seed",
    "sweep_value",
    "epochs_baseline",
    "epochs_augmented",
    "fitted_rate_baseline",
    "fitted_rate_augmented",
    "final_distance",
    "grad_evals_baseline",
    "grad_evals_augmented",
    "pass",
    "aux_pass",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub seed: u64,
    pub sweep_value: f64,
    pub epochs_baseline: Option<u64>,
    pub epochs_augmented: Option<u64>,
    pub fitted_rate_baseline: Option<f64>,
    pub fitted_rate_augmented: Option<f64>,
    pub final_distance: Option<f64>,
    pub grad_evals_baseline: Option<u64>,
    pub grad_evals_augmented: Option<u64>,
    pub pass: bool,
    pub aux_pass: Option<bool>,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn new(experiment: &str, seed: u64, sweep_value: f64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            seed,
            sweep_value,
            epochs_baseline: None,
            epochs_augmented: None,
            fitted_rate_baseline: None,
            fitted_rate_augmented: None,
            final_distance: None,
            grad_evals_baseline: None,
            grad_evals_augmented: None,
            pass: false,
            aux_pass: None,
            error: None,
        }
    }

    /// Row recording a failed arm; `pass` stays false.
    pub fn failed(experiment: &str, seed: u64, sweep_value: f64, message: String) -> Self {
        let mut row = Self::new(experiment, seed, sweep_value);
        row.error = Some(message);
        row
    }

    pub fn to_record(&self) -> Vec<String> {
        fn u(v: &Option<u64>) -> String {
            v.map_or_else(|| NA.to_owned(), |x| x.to_string())
        }
        fn f(v: &Option<f64>) -> String {
            v.map_or_else(|| NA.to_owned(), |x| x.to_string())
        }
        fn b(v: &Option<bool>) -> String {
            v.map_or_else(|| NA.to_owned(), |x| x.to_string())
        }
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.sweep_value.to_string(),
            u(&self.epochs_baseline),
            u(&self.epochs_augmented),
            f(&self.fitted_rate_baseline),
            f(&self.fitted_rate_augmented),
            f(&self.final_distance),
            u(&self.grad_evals_baseline),
            u(&self.grad_evals_augmented),
            self.pass.to_string(),
            b(&self.aux_pass),
            self.error.clone().unwrap_or_else(|| NA.to_owned()),
        ]
    }
}

/// Canonical output order: sweep value first, then seed.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.seed.cmp(&b.seed))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_width_matches_the_header() {
        let row = ResultRow::new("rate_check", 3, 1.5);
        assert_eq!(row.to_record().len(), CSV_HEADER.len());
    }

    #[test]
    fn missing_cells_render_as_sentinels() {
        let row = ResultRow::new("x", 0, 0.0);
        let rec = row.to_record();
        assert_eq!(rec[3], NA);
        assert_eq!(rec[10], "false");
        assert_eq!(rec[11], NA);
        assert_eq!(rec[12], NA);
    }

    #[test]
    fn rows_sort_by_sweep_then_seed() {
        let mut rows = vec![
            ResultRow::new("x", 2, 1.0),
            ResultRow::new("x", 0, 4.0),
            ResultRow::new("x", 1, 1.0),
            ResultRow::new("x", 0, 0.0),
        ];
        sort_rows(&mut rows);
        let order: Vec<(f64, u64)> = rows.iter().map(|r| (r.sweep_value, r.seed)).collect();
        assert_eq!(order, vec![(0.0, 0), (1.0, 1), (1.0, 2), (4.0, 0)]);
    }
}
