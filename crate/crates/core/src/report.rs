//! Self-describing JSON reports and CSV curves.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{PopperError, Result};
use crate::experiments::{Scenario, SweepRow};

/// Significant digits kept in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Units and definitions shared by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Convention {
    pub units: &'static str,
    pub reduced_wavelength: &'static str,
    pub free_flight: &'static str,
    pub width: &'static str,
    pub fwhm: &'static str,
    pub coefficient_note: &'static str,
}

impl Default for Convention {
    fn default() -> Self {
        Self {
            units: "lengths in mm, areas in mm^2, wavenumbers in rad_per_mm; hbar = 1",
            reduced_wavelength: "Lambda = lambda / pi",
            free_flight: "a flight L adds i*Lambda*L to Gamma of exp(-y^2/Gamma)",
            width: "W = |Gamma| / sqrt(Re Gamma), intensity exp(-2 y^2 / W^2)",
            fwhm: "FWHM = sqrt(2 ln 2) * W",
            coefficient_note: "the far-field term of W^2 is Lambda^2 D^2 / s^2 (not 4 Lambda^2 D^2 / s^2)",
        }
    }
}

/// Envelope written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub convention: Convention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub results: T,
}

impl<T: Serialize> ReportDocument<T> {
    pub fn new(command: &'static str, scenario: Option<Scenario>, results: T) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            convention: Convention::default(),
            scenario,
            results,
        }
    }

    /// Pretty JSON with numbers rounded to [`SIGNIFICANT_DIGITS`].
    pub fn to_json(&self) -> Result<String> {
        let value = round_value(serde_json::to_value(self)?);
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }
}

/// Round to `SIGNIFICANT_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| round_sig(v).to_string()).unwrap_or_default()
}

/// Sweep rows as CSV: `slit_full_width_mm,fwhm_analytic_mm[,fwhm_oracle_mm]`,
/// plus `fitted_a2_mm2,flag` when an observed width was inverted.
pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let oracle = rows.iter().any(|r| r.fwhm_oracle_mm.is_some());
    let fitted = rows.iter().any(|r| r.fitted_a2_mm2.is_some() || r.flag.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["slit_full_width_mm", "fwhm_analytic_mm"];
    if oracle {
        header.push("fwhm_oracle_mm");
    }
    if fitted {
        header.extend(["fitted_a2_mm2", "flag"]);
    }
    w.write_record(&header).map_err(csv_error)?;
    for r in rows {
        let mut record = vec![cell(Some(r.slit_full_width_mm)), cell(Some(r.fwhm_analytic_mm))];
        if oracle {
            record.push(cell(r.fwhm_oracle_mm));
        }
        if fitted {
            record.push(cell(r.fitted_a2_mm2));
            record.push(r.flag.clone().unwrap_or_default());
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `quantity,value[,...]` table for a flat list of named numbers.
pub fn write_table_csv(header: &[&str], rows: &[(String, Vec<Option<f64>>)], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for (name, values) in rows {
        let mut record = vec![name.clone()];
        record.extend(values.iter().map(|v| cell(*v)));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> PopperError {
    PopperError::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.657194123456), 0.657194123);
        assert_eq!(round_sig(-1234567890123.0), -1234567890000.0);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_value(serde_json::json!([1.0 / 3.0, 2])), serde_json::json!([0.333333333, 2]));
    }

    #[test]
    fn convention_always_present() {
        let doc = ReportDocument::new("spin", None, serde_json::json!({}));
        let text = doc.to_json().unwrap();
        assert!(text.contains("\"convention\""));
        assert!(text.contains("Lambda = lambda / pi"));
    }

    #[test]
    fn csv_header_follows_columns() {
        let row = SweepRow {
            slit_full_width_mm: 0.2,
            fwhm_analytic_mm: 4.398849,
            fwhm_oracle_mm: None,
            fwhm_oracle_hard_edge_mm: None,
            beam_fwhm_oracle_mm: None,
            fitted_a2_mm2: None,
            flag: None,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&[row], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "slit_full_width_mm,fwhm_analytic_mm\n0.2,4.398849\n");
    }
}
