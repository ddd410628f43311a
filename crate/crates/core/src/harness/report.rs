use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SweepRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["snr_db", "analytic", "empirical", "stderr", "trials"];

/// JSON form of a sweep: the rows plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: SweepReport = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        for (i, r) in report.rows.iter().enumerate() {
            if !(0.0..=1.0).contains(&r.empirical) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("row {i}: empirical rate {} outside [0, 1]", r.empirical),
                });
            }
        }
        Ok(report)
    }
}

/// Writes rows as UTF-8 CSV with the fixed header.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {headers:?}") });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<SweepRow>().enumerate() {
        let row = rec.map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() })?;
        if !(0.0..=1.0).contains(&row.empirical) {
            return Err(Error::Parse { line: i + 2, msg: "empirical rate outside [0, 1]".into() });
        }
        rows.push(row);
    }
    Ok(rows)
}
