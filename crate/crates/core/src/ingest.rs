//! Merging plant power records with irregular cloud cover reports into an
//! hourly dataset.
//!
//! Input schemas: `timestamp,power_kw,temp_c` (hourly power and temperature)
//! and `timestamp,cci` (cloud cover reports at arbitrary times). Timestamps
//! are RFC 3339 with offset. Each report belongs to the clock hour it falls
//! in; hours with several reports use their mean, hours without any are
//! dropped.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Duration, FixedOffset, Timelike};
use serde::Serialize;

use crate::dataset::{parse_timestamp, Dataset, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRecord {
    pub timestamp: DateTime<FixedOffset>,
    pub power: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CciRecord {
    pub timestamp: DateTime<FixedOffset>,
    /// Fraction of sky covered, `[0, 1]` after scaling.
    pub cci: f64,
}

/// Unit of the cloud cover column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CciScale {
    #[default]
    Fraction,
    /// Eighths of sky, divided by 8 on input.
    Okta,
}

impl CciScale {
    pub fn to_fraction(self, v: f64) -> f64 {
        match self {
            CciScale::Fraction => v,
            CciScale::Okta => v / 8.0,
        }
    }
}

/// Parsed rows plus the number of rows that could not be parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub unparseable: usize,
}

fn read_rows<R: Read, T>(
    r: R,
    source: &str,
    header: &[&str],
    parse: impl Fn(&csv::StringRecord) -> Option<T>,
) -> Result<Parsed<T>> {
    let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let found = rd.headers()?.clone();
    if found.iter().map(str::trim).collect::<Vec<_>>() != header {
        return Err(Error::Schema {
            path: source.into(),
            detail: format!("expected header {header:?}, got {found:?}"),
        });
    }
    let mut records = Vec::new();
    let mut unparseable = 0;
    for (i, row) in rd.records().enumerate() {
        match row.ok().and_then(|row| parse(&row)) {
            Some(rec) => records.push(rec),
            None => {
                log::warn!("{source}: skipping unparseable row {}", i + 2);
                unparseable += 1;
            }
        }
    }
    Ok(Parsed { records, unparseable })
}

fn field_f64(row: &csv::StringRecord, i: usize) -> Option<f64> {
    row.get(i)?.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_power_csv<R: Read>(r: R, source: &str) -> Result<Parsed<PowerRecord>> {
    read_rows(r, source, &["timestamp", "power_kw", "temp_c"], |row| {
        if row.len() != 3 {
            return None;
        }
        Some(PowerRecord {
            timestamp: parse_timestamp(row.get(0)?).ok()?,
            power: field_f64(row, 1)?,
            temperature: field_f64(row, 2)?,
        })
    })
}

pub fn read_cci_csv<R: Read>(r: R, source: &str, scale: CciScale) -> Result<Parsed<CciRecord>> {
    read_rows(r, source, &["timestamp", "cci"], |row| {
        if row.len() != 2 {
            return None;
        }
        Some(CciRecord {
            timestamp: parse_timestamp(row.get(0)?).ok()?,
            cci: scale.to_fraction(field_f64(row, 1)?),
        })
    })
}

/// Counts describing what the merge kept and discarded. Power rows satisfy
/// `power_rows = power_unparseable + power_rows_merged + power_rows_dropped`
/// and report rows
/// `cci_rows = cci_unparseable + cci_out_of_range + cci_reports_used + cci_reports_unmatched`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QualityReport {
    pub power_rows: usize,
    pub power_unparseable: usize,
    /// Power rows whose timestamp was not on the hour (floored).
    pub power_misaligned: usize,
    /// Negative power values (kept).
    pub power_negative: usize,
    pub power_rows_merged: usize,
    /// Power rows in hours without a cloud cover report.
    pub power_rows_dropped: usize,
    /// Hours with several power rows, averaged.
    pub power_duplicate_hours: usize,
    pub cci_rows: usize,
    pub cci_unparseable: usize,
    /// Reports outside `[0, 1]` after scaling (discarded).
    pub cci_out_of_range: usize,
    pub cci_reports_used: usize,
    /// Reports in hours without power data.
    pub cci_reports_unmatched: usize,
    /// Output hours built from more than one report.
    pub cci_averaged_hours: usize,
    pub hours_merged: usize,
    pub hours_dropped: usize,
}

impl QualityReport {
    /// Whether every raw row is accounted for exactly once.
    pub fn is_consistent(&self) -> bool {
        self.power_rows == self.power_unparseable + self.power_rows_merged + self.power_rows_dropped
            && self.cci_rows
                == self.cci_unparseable
                    + self.cci_out_of_range
                    + self.cci_reports_used
                    + self.cci_reports_unmatched
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

fn hour_start(t: &DateTime<FixedOffset>) -> DateTime<FixedOffset> {
    *t - Duration::minutes(i64::from(t.minute()))
        - Duration::seconds(i64::from(t.second()))
        - Duration::nanoseconds(i64::from(t.nanosecond()))
}

/// Order-insensitive mean.
fn sorted_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Default)]
struct PowerHour {
    stamps: Vec<DateTime<FixedOffset>>,
    power: Vec<f64>,
    temperature: Vec<f64>,
}

/// Joins power rows and cloud cover reports on the clock hour. The result is
/// sorted and strictly increasing regardless of input order.
pub fn merge_hourly(power: &[PowerRecord], cci: &[CciRecord]) -> (Dataset, QualityReport) {
    let mut report = QualityReport {
        power_rows: power.len(),
        cci_rows: cci.len(),
        ..Default::default()
    };

    let mut hours: BTreeMap<i64, PowerHour> = BTreeMap::new();
    for rec in power {
        let start = hour_start(&rec.timestamp);
        if start != rec.timestamp {
            report.power_misaligned += 1;
        }
        if rec.power < 0.0 {
            report.power_negative += 1;
        }
        let entry = hours.entry(start.timestamp()).or_default();
        entry.stamps.push(start);
        entry.power.push(rec.power);
        entry.temperature.push(rec.temperature);
    }

    let mut reports: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for rec in cci {
        if !(0.0..=1.0).contains(&rec.cci) {
            log::warn!("cloud cover {} at {} out of range", rec.cci, rec.timestamp);
            report.cci_out_of_range += 1;
            continue;
        }
        reports
            .entry(hour_start(&rec.timestamp).timestamp())
            .or_default()
            .push(rec.cci);
    }

    let mut samples = Vec::new();
    for (key, mut hour) in hours {
        let n_rows = hour.power.len();
        if n_rows > 1 {
            report.power_duplicate_hours += 1;
        }
        match reports.get_mut(&key) {
            Some(values) => {
                report.power_rows_merged += n_rows;
                report.cci_reports_used += values.len();
                if values.len() > 1 {
                    report.cci_averaged_hours += 1;
                }
                report.hours_merged += 1;
                hour.stamps.sort_by_key(|t| t.offset().local_minus_utc());
                samples.push(Sample {
                    timestamp: hour.stamps[0],
                    power: sorted_mean(&mut hour.power),
                    temperature: sorted_mean(&mut hour.temperature),
                    cloud: sorted_mean(values),
                });
                values.clear();
            }
            None => {
                report.power_rows_dropped += n_rows;
                report.hours_dropped += 1;
            }
        }
    }
    report.cci_reports_unmatched = reports.values().map(Vec::len).sum();

    if samples.is_empty() {
        log::warn!("no hour has both power data and a cloud cover report");
    }
    (Dataset::new(60, samples), report)
}

/// Reads both files and merges them.
pub fn ingest_files(power: &Path, cci: &Path, scale: CciScale) -> Result<(Dataset, QualityReport)> {
    let p = read_power_csv(std::fs::File::open(power)?, &power.display().to_string())?;
    let c = read_cci_csv(std::fs::File::open(cci)?, &cci.display().to_string(), scale)?;
    let (ds, mut report) = merge_hourly(&p.records, &c.records);
    report.power_rows += p.unparseable;
    report.power_unparseable = p.unparseable;
    report.cci_rows += c.unparseable;
    report.cci_unparseable = c.unparseable;
    Ok((ds, report))
}
