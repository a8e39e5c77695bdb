//! Time-indexed power/weather records and the canonical dataset CSV
//! (`timestamp,power_kw,temp_c,cci`, RFC 3339 timestamps with offset).

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{regressor, Regressor};
use crate::solar::{ClearSkyModel, DaylightCalendar, DaylightSlot};

/// One sample; the timestamp marks the start of the sampling interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub timestamp: DateTime<FixedOffset>,
    pub power: f64,
    pub temperature: f64,
    pub cloud: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    timestamp: String,
    power_kw: f64,
    temp_c: f64,
    cci: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub period_minutes: u32,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(period_minutes: u32, samples: Vec<Sample>) -> Self {
        Self {
            period_minutes,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn timestamps(&self) -> Vec<DateTime<FixedOffset>> {
        self.samples.iter().map(|s| s.timestamp).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for s in &self.samples {
            wr.serialize(SampleRow {
                timestamp: s.timestamp.to_rfc3339(),
                power_kw: s.power,
                temp_c: s.temperature,
                cci: s.cloud,
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads the canonical CSV. The sampling period is the smallest gap
    /// between consecutive timestamps unless given explicitly.
    pub fn read_csv<R: Read>(r: R, period_minutes: Option<u32>) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        let expected = ["timestamp", "power_kw", "temp_c", "cci"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Schema {
                path: "<dataset>".into(),
                detail: format!("expected header {expected:?}, got {headers:?}"),
            });
        }
        let mut samples = Vec::new();
        for row in rd.deserialize() {
            let row: SampleRow = row?;
            samples.push(Sample {
                timestamp: parse_timestamp(&row.timestamp)?,
                power: row.power_kw,
                temperature: row.temp_c,
                cloud: row.cci,
            });
        }
        let period = match period_minutes {
            Some(p) => p,
            None => infer_period(&samples)?,
        };
        Ok(Self::new(period, samples))
    }

    pub fn load(path: &Path, period_minutes: Option<u32>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, period_minutes).map_err(|e| match e {
            Error::Schema { detail, .. } => Error::Schema {
                path: path.to_path_buf(),
                detail,
            },
            other => other,
        })
    }
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(s.trim()).map_err(|e| Error::Timestamp(format!("{s:?}: {e}")))
}

fn infer_period(samples: &[Sample]) -> Result<u32> {
    samples
        .windows(2)
        .map(|w| (w[1].timestamp - w[0].timestamp).num_minutes())
        .filter(|&m| m > 0)
        .min()
        .map(|m| m as u32)
        .ok_or(Error::Empty(
            "dataset (need two samples to infer the sampling period)",
        ))
}

/// Measured data at one daylight index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub power: f64,
    pub temperature: f64,
    pub cloud: f64,
}

impl Observation {
    pub fn is_finite(&self) -> bool {
        self.power.is_finite() && self.temperature.is_finite() && self.cloud.is_finite()
    }
}

/// A dataset restricted to daylight samples, with clear-sky irradiance
/// attached and consecutive daylight indices (1-based).
#[derive(Debug, Clone)]
pub struct DaylightSeries {
    calendar: DaylightCalendar,
    observations: Vec<Observation>,
    power_by_time: HashMap<i64, f64>,
}

impl DaylightSeries {
    pub fn build(dataset: &Dataset, model: &ClearSkyModel) -> Result<Self> {
        let calendar =
            DaylightCalendar::from_timestamps(model, &dataset.timestamps(), dataset.period_minutes)?;
        let observations = calendar
            .slots()
            .iter()
            .map(|slot| {
                let s = &dataset.samples[slot.source];
                Observation {
                    power: s.power,
                    temperature: s.temperature,
                    cloud: s.cloud,
                }
            })
            .collect();
        let power_by_time = dataset
            .samples
            .iter()
            .map(|s| (s.timestamp.timestamp(), s.power))
            .collect();
        Ok(Self {
            calendar,
            observations,
            power_by_time,
        })
    }

    pub fn calendar(&self) -> &DaylightCalendar {
        &self.calendar
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observation(&self, k: usize) -> Option<&Observation> {
        k.checked_sub(1).and_then(|i| self.observations.get(i))
    }

    pub fn slot(&self, k: usize) -> Option<&DaylightSlot> {
        self.calendar.slot(k)
    }

    pub fn clear_sky(&self, k: usize) -> Option<f64> {
        self.slot(k).map(|s| s.clear_sky)
    }

    pub fn regressor(&self, k: usize) -> Option<Regressor> {
        let o = self.observation(k)?;
        Some(regressor(self.clear_sky(k)?, o.temperature, o.cloud))
    }

    /// Measured power at an arbitrary dataset timestamp (daylight or not).
    pub fn power_at(&self, t: &DateTime<FixedOffset>) -> Option<f64> {
        self.power_by_time.get(&t.timestamp()).copied()
    }

    /// Measured power one day before daylight sample `k`, at the same time of day.
    pub fn power_day_before(&self, k: usize) -> Option<f64> {
        let t = self.slot(k)?.timestamp - Duration::days(1);
        self.power_at(&t)
    }

    /// Finite measured daylight power on days `>= from_day`.
    pub fn daylight_power(&self, from_day: u32) -> Vec<f64> {
        self.calendar
            .slots()
            .iter()
            .zip(&self.observations)
            .filter(|(s, o)| s.day >= from_day && o.power.is_finite())
            .map(|(_, o)| o.power)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn sample(h: u32, p: f64) -> Sample {
        Sample {
            timestamp: FixedOffset::east_opt(3600)
                .unwrap()
                .with_ymd_and_hms(2015, 4, 2, h, 0, 0)
                .unwrap(),
            power: p,
            temperature: 15.0 + f64::from(h) * 0.1,
            cloud: 0.25,
        }
    }

    #[test]
    fn csv_round_trip_and_period_inference() {
        let ds = Dataset::new(60, (0..24).map(|h| sample(h, f64::from(h) * 1.5)).collect());
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("timestamp,power_kw,temp_c,cci\n2015-04-02T00:00:00+01:00,"));
        let back = Dataset::read_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn wrong_header_is_schema_error() {
        let text = "time,p,t,n\n2015-04-02T00:00:00+01:00,1,2,0.1\n";
        assert!(matches!(
            Dataset::read_csv(text.as_bytes(), Some(60)),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn bad_timestamp_is_rejected() {
        let text = "timestamp,power_kw,temp_c,cci\nyesterday,1,2,0.1\n";
        assert!(matches!(
            Dataset::read_csv(text.as_bytes(), Some(60)),
            Err(Error::Timestamp(_))
        ));
    }
}
