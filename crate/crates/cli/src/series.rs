//! Annual-maximum series: CSV ingestion and adjacent-year imputation.

use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult, Kind};

pub const MIN_OBSERVED: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub year: i32,
    pub value: Option<f64>,
    /// Set when `value` was filled in by [`impute_adjacent`].
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub imputed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnualSeries {
    pub records: Vec<Record>,
    pub source: String,
}

impl AnnualSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn missing_years(&self) -> Vec<i32> {
        self.records
            .iter()
            .filter(|r| r.value.is_none())
            .map(|r| r.year)
            .collect()
    }

    /// Fails unless at least [`MIN_OBSERVED`] values are present.
    pub fn require_observed(&self) -> CliResult<()> {
        let observed = self.records.iter().filter(|r| r.value.is_some()).count();
        if observed < MIN_OBSERVED {
            return Err(CliError::validation(format!(
                "{}: {observed} non-missing values, need at least {MIN_OBSERVED}",
                self.source
            )));
        }
        Ok(())
    }

    /// Non-missing values in year order.
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.value).collect()
    }
}

pub fn load_csv(path: &Path) -> CliResult<AnnualSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text, &path.display().to_string())
}

/// Parse `year,value` text. Lines starting with `#` and blank lines are
/// skipped; the first remaining line must be the header.
pub fn parse_csv(text: &str, source: &str) -> CliResult<AnnualSeries> {
    let parse_err =
        |line: usize, msg: String| CliError::new(Kind::Parse, format!("{source}:{line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    match lines.next() {
        Some((_, h)) if h.replace(' ', "").eq_ignore_ascii_case("year,value") => {}
        Some((n, h)) => {
            return Err(parse_err(
                n,
                format!("expected header 'year,value', found '{h}'"),
            ))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }

    let mut records: Vec<Record> = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(
                n,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let year: i32 = fields[0]
            .parse()
            .map_err(|_| parse_err(n, format!("invalid year '{}'", fields[0])))?;
        let value = match fields[1] {
            "" => None,
            s => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| parse_err(n, format!("invalid value '{s}'")))?;
                if !v.is_finite() {
                    return Err(parse_err(n, format!("non-finite value '{s}'")));
                }
                Some(v)
            }
        };
        if let Some(prev) = records.last() {
            if year == prev.year {
                return Err(CliError::validation(format!(
                    "{source}:{n}: duplicate year {year}"
                )));
            }
            if year < prev.year {
                return Err(CliError::validation(format!(
                    "{source}:{n}: year {year} follows {}",
                    prev.year
                )));
            }
        }
        records.push(Record {
            year,
            value,
            imputed: false,
        });
    }
    Ok(AnnualSeries {
        records,
        source: source.to_string(),
    })
}

/// Replace each missing value by the mean of the two chronologically
/// adjacent records. Missing endpoints and runs of consecutive missing years
/// are rejected.
pub fn impute_adjacent(series: &AnnualSeries) -> CliResult<AnnualSeries> {
    let recs = &series.records;
    let mut bad = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        if r.value.is_some() {
            continue;
        }
        let isolated = i > 0
            && i + 1 < recs.len()
            && recs[i - 1].value.is_some()
            && recs[i + 1].value.is_some();
        if !isolated {
            bad.push(r.year.to_string());
        }
    }
    if !bad.is_empty() {
        return Err(CliError::new(
            Kind::Imputation,
            format!(
                "cannot impute years {} (missing endpoint or consecutive missing years)",
                bad.join(", ")
            ),
        ));
    }
    let mut out = series.clone();
    for i in 0..recs.len() {
        if recs[i].value.is_none() {
            let (a, b) = (recs[i - 1].value.unwrap(), recs[i + 1].value.unwrap());
            out.records[i].value = Some(0.5 * (a + b));
            out.records[i].imputed = true;
        }
    }
    Ok(out)
}
