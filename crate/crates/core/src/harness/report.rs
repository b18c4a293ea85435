//! Result tables: per-trial per-user rate rows, per-scheme aggregates, and
//! CSV/JSON emission. Reports carry no clocks or environment state, so a
//! rerun with the same inputs is byte-identical.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Column order of the CSV surface (and of the JSON row objects).
pub const CSV_COLUMNS: [&str; 11] = [
    "experiment",
    "scheme",
    "trial",
    "seed",
    "K",
    "N",
    "user_id",
    "beam_id",
    "rate_bps",
    "sum_rate_bps",
    "objective",
];

/// One observation: a user's delivered rate in one trial under one scheme.
/// Aggregate rows use `trial = -1`, `user_id = -1`, `beam_id = -1` and carry
/// the across-trial mean sum rate and mean objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub experiment: String,
    pub scheme: String,
    pub trial: i64,
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub user_id: i64,
    pub beam_id: i64,
    /// Delivered (time-share-weighted) rate for user rows; 0 in aggregates.
    pub rate_bps: f64,
    /// The trial's scheme sum rate (repeated on each of its user rows).
    pub sum_rate_bps: f64,
    pub objective: f64,
}

/// Run-level provenance kept alongside the rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub master_seed: u64,
    pub delta_deg: f64,
    pub trials_per_combination: usize,
    /// Trials dropped because some scheme failed; see `exclusions`.
    pub excluded_trials: usize,
    pub exclusions: Vec<String>,
    /// Solver tolerances and caps in force, as `name=value` strings.
    pub solver_settings: Vec<String>,
}

/// A complete experiment result: rows plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<RateRow>,
}

/// Output encodings of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown format {other:?} (csv|json)"))),
        }
    }
}

impl RateReport {
    /// The CSV table: fixed header, one line per row, `\n` endings.
    pub fn to_csv_string(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.experiment,
                r.scheme,
                r.trial,
                r.seed,
                r.k,
                r.n,
                r.user_id,
                r.beam_id,
                r.rate_bps,
                r.sum_rate_bps,
                r.objective
            ));
        }
        out
    }

    /// Pretty JSON with metadata and the same records as the CSV.
    pub fn to_json_string(&self) -> Result<String> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    /// Mean sum rate recorded by the aggregate row of `(scheme, k, n)`.
    pub fn mean_sum_rate(&self, scheme: &str, k: usize, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.trial == -1 && r.scheme == scheme && r.k == k && r.n == n)
            .map(|r| r.sum_rate_bps)
    }

    /// Per-trial sum rates of `(scheme, k, n)`, one entry per included trial.
    pub fn trial_sum_rates(&self, scheme: &str, k: usize, n: usize) -> Vec<f64> {
        let mut seen = std::collections::BTreeMap::new();
        for r in &self.rows {
            if r.trial >= 0 && r.scheme == scheme && r.k == k && r.n == n {
                seen.entry(r.trial).or_insert(r.sum_rate_bps);
            }
        }
        seen.into_values().collect()
    }
}

/// Writes the report to `path` in the chosen encoding.
pub fn emit_report(report: &RateReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Csv => report.to_csv_string(),
        ReportFormat::Json => report.to_json_string()?,
    };
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

// ── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_report() -> RateReport {
        let row = |trial: i64, user: i64, rate: f64| RateRow {
            experiment: "single_beam_sweep".into(),
            scheme: "sbsf".into(),
            trial,
            seed: 7,
            k: 2,
            n: 1,
            user_id: user,
            beam_id: if user < 0 { -1 } else { 0 },
            rate_bps: rate,
            sum_rate_bps: 3.5e7,
            objective: 33.25,
        };
        RateReport {
            metadata: ReportMetadata {
                master_seed: 1,
                delta_deg: 2.0,
                trials_per_combination: 1,
                excluded_trials: 0,
                exclusions: vec![],
                solver_settings: vec!["delta_deg=2".into()],
            },
            rows: vec![row(0, 0, 1.5e7), row(0, 1, 2e7), row(-1, -1, 0.0)],
        }
    }

    #[test]
    fn csv_header_matches_the_column_contract() {
        let csv = tiny_report().to_csv_string();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "experiment,scheme,trial,seed,K,N,user_id,beam_id,rate_bps,sum_rate_bps,objective"
        );
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn csv_floats_parse_back_to_the_same_bits() {
        let report = tiny_report();
        let csv = report.to_csv_string();
        for (line, row) in csv.lines().skip(1).zip(&report.rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), CSV_COLUMNS.len());
            assert_eq!(fields[8].parse::<f64>().unwrap(), row.rate_bps);
            assert_eq!(fields[9].parse::<f64>().unwrap(), row.sum_rate_bps);
            assert_eq!(fields[10].parse::<f64>().unwrap(), row.objective);
        }
    }

    #[test]
    fn json_mirrors_the_csv_records() {
        let report = tiny_report();
        let json: serde_json::Value =
            serde_json::from_str(&report.to_json_string().unwrap()).unwrap();
        let rows = json["rows"].as_array().unwrap();
        assert_eq!(rows.len(), report.rows.len());
        for (value, row) in rows.iter().zip(&report.rows) {
            assert_eq!(value["experiment"], row.experiment.as_str());
            assert_eq!(value["scheme"], row.scheme.as_str());
            assert_eq!(value["trial"].as_i64().unwrap(), row.trial);
            assert_eq!(value["K"].as_u64().unwrap() as usize, row.k);
            assert_eq!(value["N"].as_u64().unwrap() as usize, row.n);
            assert_eq!(value["rate_bps"].as_f64().unwrap(), row.rate_bps);
            assert_eq!(value["sum_rate_bps"].as_f64().unwrap(), row.sum_rate_bps);
        }
        assert_eq!(json["metadata"]["master_seed"].as_u64().unwrap(), 1);
    }

    #[test]
    fn emission_surfaces_the_path_on_io_errors() {
        let report = tiny_report();
        let err = emit_report(&report, ReportFormat::Csv, "/nonexistent-dir/x.csv").unwrap_err();
        match err {
            Error::Io { path, .. } => assert!(path.contains("nonexistent-dir")),
            other => panic!("expected an io error, got {other:?}"),
        }
    }

    #[test]
    fn format_names_parse_case_sensitively() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("CSV".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn trial_sum_rates_skip_aggregates_and_deduplicate_users() {
        let report = tiny_report();
        assert_eq!(report.trial_sum_rates("sbsf", 2, 1), vec![3.5e7]);
        assert_eq!(report.mean_sum_rate("sbsf", 2, 1), Some(3.5e7));
        assert!(report.mean_sum_rate("sbs", 2, 1).is_none());
    }
}
