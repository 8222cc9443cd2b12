//! Reading penetration series from delimited text.
//!
//! The format has a `year,penetration` header and one row per observation.
//! Years are absolute and are rebased to years since the standard's inception.
//! Penetration may be a fraction or a percentage: if any value exceeds 1 the
//! whole series is read as percentages.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_observations, AdoptionObservation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearPenetration {
    pub year: f64,
    pub penetration: f64,
}

/// Parses rows without rebasing. Percentages are normalized to fractions.
pub fn read_series<R: Read>(input: R) -> Result<Vec<YearPenetration>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let names: Vec<String> = headers.iter().map(str::to_ascii_lowercase).collect();
    if names != ["year", "penetration"] {
        return Err(Error::Parse(format!("expected header 'year,penetration', got '{}'", headers.iter().collect::<Vec<_>>().join(","))));
    }

    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("row {}: invalid {name} '{}'", line + 2, &record[i])))
        };
        rows.push(YearPenetration { year: field(0, "year")?, penetration: field(1, "penetration")? });
    }

    if rows.iter().any(|r| r.penetration > 1.0) {
        for r in &mut rows {
            r.penetration /= 100.0;
        }
    }
    Ok(rows)
}

/// Converts absolute years to years since `inception_year`.
pub fn rebase(rows: &[YearPenetration], inception_year: f64) -> Result<Vec<AdoptionObservation>> {
    let observations: Vec<AdoptionObservation> =
        rows.iter().map(|r| AdoptionObservation::new(r.year - inception_year, r.penetration)).collect();
    validate_observations(&observations)?;
    Ok(observations)
}

/// Reads and rebases a series. Without an inception year the first row is `t = 0`.
pub fn read_observations<R: Read>(input: R, inception_year: Option<f64>) -> Result<Vec<AdoptionObservation>> {
    let rows = read_series(input)?;
    let Some(origin) = inception_year.or_else(|| rows.first().map(|r| r.year)) else {
        return Ok(Vec::new());
    };
    rebase(&rows, origin)
}
