//! Experiment reports: rows, CSV encoding, and the JSON sidecar.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CSV_HEADER: &str = "abscissa,estimate,std_err,theory,n_effective";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub abscissa: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub theory: f64,
    pub n_effective: usize,
    /// Near a discontinuity of the limit curve; excluded from scoring.
    #[serde(default)]
    pub flagged: bool,
}

/// Run metadata written next to the CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub model: String,
    pub n: usize,
    pub m: u64,
    pub delta: u32,
    pub entropy: f64,
    pub t_ent: f64,
    pub root_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_std_err: Option<f64>,
    pub start_mode: String,
    pub start_count: usize,
    pub replicates: usize,
    pub env_samples: usize,
    pub flagged: Vec<f64>,
    /// Per-row mean over replicates of the minimum over start vertices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_envelope: Option<Vec<f64>>,
    pub not_converged: usize,
    pub renormalizations: usize,
    pub runtime_secs: f64,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub meta: Metadata,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig12(r.abscissa),
                fmt_sig12(r.estimate),
                fmt_sig12(r.std_err),
                fmt_sig12(r.theory),
                r.n_effective
            );
        }
        out
    }

    /// Parses a report CSV and checks the row invariants.
    pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(Error::BadValue("missing report header".into()));
        }
        lines
            .map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 5 {
                    return Err(Error::BadValue(format!("bad row {line:?}")));
                }
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::BadValue(format!("bad number {s:?}")))
                };
                let row = ReportRow {
                    abscissa: num(f[0])?,
                    estimate: num(f[1])?,
                    std_err: num(f[2])?,
                    theory: num(f[3])?,
                    n_effective: f[4]
                        .parse()
                        .map_err(|_| Error::BadValue(format!("bad count {:?}", f[4])))?,
                    flagged: false,
                };
                if !(0.0..=1.0).contains(&row.estimate) || !(row.std_err >= 0.0) {
                    return Err(Error::BadValue(format!("row violates invariants: {line:?}")));
                }
                Ok(row)
            })
            .collect()
    }

    /// Largest `|estimate - theory|` over unflagged rows with a finite theory value.
    pub fn max_deviation(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| !r.flagged && r.theory.is_finite())
            .map(|r| (r.estimate - r.theory).abs())
            .reduce(f64::max)
    }

    pub fn row_at(&self, abscissa: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| (r.abscissa - abscissa).abs() < 1e-12)
    }
}

/// Decimal rendering with 12 significant digits in the style of C's `%.12g`:
/// fixed notation for exponents in `[-4, 12)`, scientific otherwise, trailing
/// zeros trimmed.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x.abs());
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };
    if !(-4..12).contains(&exp) {
        let m = trim_frac(format!("{}.{}", &digits[..1], &digits[1..]));
        let es = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{m}e{es}{:02}", exp.abs());
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{}", trim_frac(body))
}

fn trim_frac(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig12_matches_printf_g() {
        let cases = [
            (0.735758882342885, "0.735758882343"),
            (1.0, "1"),
            (0.3, "0.3"),
            (100.0, "100"),
            (1e-10, "1e-10"),
            (1.5e-5, "1.5e-05"),
            (0.000123456789012345, "0.000123456789012"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (-2.5, "-2.5"),
            (0.9999999999996, "1"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_sig12(x), want, "{x}");
        }
        assert_eq!(fmt_sig12(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn sig12_round_trips_to_12_digits(x in -1e6f64..1e6) {
            let back: f64 = fmt_sig12(x).parse().unwrap();
            prop_assert!((back - x).abs() <= x.abs() * 1e-11 + 1e-300);
        }
    }

    #[test]
    fn csv_round_trip_and_invariants() {
        let rep = ExperimentReport {
            rows: vec![
                ReportRow {
                    abscissa: 0.5,
                    estimate: 0.9,
                    std_err: 0.01,
                    theory: 1.0,
                    n_effective: 3,
                    flagged: false,
                },
                ReportRow {
                    abscissa: 1.0,
                    estimate: 0.4,
                    std_err: 0.0,
                    theory: f64::NAN,
                    n_effective: 3,
                    flagged: true,
                },
            ],
            meta: Metadata::default(),
        };
        let csv = rep.to_csv();
        assert_eq!(
            csv,
            "abscissa,estimate,std_err,theory,n_effective\n0.5,0.9,0.01,1,3\n1,0.4,0,nan,3\n"
        );
        let rows = ExperimentReport::parse_csv(&csv).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].theory.is_nan());
        assert!(ExperimentReport::parse_csv("abscissa,estimate,std_err,theory,n_effective\n1,1.5,0,0,1\n").is_err());
        assert!((rep.max_deviation().unwrap() - 0.1).abs() < 1e-12);
    }
}
