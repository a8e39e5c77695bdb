//! Day-ahead and hour-ahead power forecasts.
//!
//! Index conventions follow [`crate::solar::DaylightCalendar`]: daylight
//! indices are 1-based and an estimate index `q` refers to the estimate after
//! processing daylight sample `q` (0 is the initial guess).

use std::io::{Read, Write};

use chrono::{DateTime, Duration, FixedOffset, NaiveTime, TimeZone, Timelike};
use serde::{Deserialize, Serialize};

use crate::dataset::DaylightSeries;
use crate::error::{Error, Result};
use crate::metrics::DayPair;
use crate::model::{regressor, ThetaVector, WeatherSample};

/// Local time of day at which day-ahead forecasts are submitted.
pub const DA_SUBMISSION_HOUR: u32 = 6;
/// Minimum lead time between an hour-ahead submission and its operating hour.
pub const HA_LEAD_MINUTES: i64 = 105;
/// Length of the hour-ahead horizon.
pub const HA_HORIZON_HOURS: i64 = 7;

/// Source of weather forecasts `Ŵ(j | k)`.
pub trait WeatherProvider: Sync {
    fn forecast(&self, j: usize, issued_at: usize) -> Option<WeatherSample>;
}

/// Replays the recorded weather as if it were a perfect forecast.
#[derive(Debug, Clone, Copy)]
pub struct ReplayProvider<'a> {
    series: &'a DaylightSeries,
}

impl<'a> ReplayProvider<'a> {
    pub fn new(series: &'a DaylightSeries) -> Self {
        Self { series }
    }
}

impl WeatherProvider for ReplayProvider<'_> {
    fn forecast(&self, j: usize, _issued_at: usize) -> Option<WeatherSample> {
        self.series.observation(j).map(|o| WeatherSample {
            cloud: o.cloud,
            temperature: o.temperature,
        })
    }
}

/// A model able to produce point forecasts over a set of daylight indices.
pub trait PointForecaster: Sync {
    fn name(&self) -> &str;

    /// Raw (unclamped) predictions for the ascending daylight indices
    /// `targets`, computed at `issued_at` with the estimate available at
    /// `estimate_index`. `None` marks entries the model cannot produce.
    fn predict(
        &self,
        series: &DaylightSeries,
        targets: &[usize],
        issued_at: usize,
        estimate_index: usize,
        provider: &dyn WeatherProvider,
    ) -> Result<Vec<Option<f64>>>;
}

/// Clamps a raw prediction to be non-negative.
pub fn clamp_power(raw: f64) -> f64 {
    if raw > 0.0 || raw.is_nan() {
        raw
    } else {
        0.0
    }
}

/// `φ(I⁰(j), T̂(j|k), N̂(j|k))ᵀ θ` before clamping.
pub fn predict_raw(clear_sky: f64, weather: &WeatherSample, theta: &ThetaVector) -> f64 {
    regressor(clear_sky, weather.temperature, weather.cloud).dot(theta)
}

/// Clamped prediction for daylight index `j` with the given θ.
pub fn predict_power(
    series: &DaylightSeries,
    j: usize,
    issued_at: usize,
    provider: &dyn WeatherProvider,
    theta: &ThetaVector,
) -> Result<f64> {
    let clear_sky = series.clear_sky(j).ok_or(Error::MissingForecast(j))?;
    let weather = provider.forecast(j, issued_at).ok_or(Error::MissingForecast(j))?;
    Ok(clamp_power(predict_raw(clear_sky, &weather, theta)))
}

/// Forecaster backed by a θ history (N5, N6 or L estimates).
#[derive(Debug, Clone)]
pub struct ParametricForecaster {
    name: String,
    thetas: Vec<ThetaVector>,
}

impl ParametricForecaster {
    pub fn new(name: impl Into<String>, thetas: Vec<ThetaVector>) -> Self {
        Self {
            name: name.into(),
            thetas,
        }
    }
}

impl PointForecaster for ParametricForecaster {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict(
        &self,
        series: &DaylightSeries,
        targets: &[usize],
        issued_at: usize,
        estimate_index: usize,
        provider: &dyn WeatherProvider,
    ) -> Result<Vec<Option<f64>>> {
        let theta = self
            .thetas
            .get(estimate_index)
            .ok_or(Error::MissingEstimate(estimate_index))?;
        targets
            .iter()
            .map(|&j| {
                let clear_sky = series.clear_sky(j).ok_or(Error::MissingForecast(j))?;
                let weather = provider.forecast(j, issued_at).ok_or(Error::MissingForecast(j))?;
                Ok(Some(predict_raw(clear_sky, &weather, theta)))
            })
            .collect()
    }
}

/// One-day-ahead naive predictor: yesterday's measurement at the same time of
/// day.
#[derive(Debug, Clone, Copy, Default)]
pub struct Odnp;

/// ODNP prediction for daylight index `j`; `None` if the previous-day sample
/// is missing.
pub fn odnp(series: &DaylightSeries, j: usize) -> Option<f64> {
    series.power_day_before(j)
}

impl PointForecaster for Odnp {
    fn name(&self) -> &str {
        "ODNP"
    }

    fn predict(
        &self,
        series: &DaylightSeries,
        targets: &[usize],
        _issued_at: usize,
        _estimate_index: usize,
        _provider: &dyn WeatherProvider,
    ) -> Result<Vec<Option<f64>>> {
        Ok(targets.iter().map(|&j| odnp(series, j)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ForecastKind {
    #[serde(rename = "DA")]
    DayAhead,
    #[serde(rename = "HA")]
    HourAhead,
}

impl ForecastKind {
    pub fn label(&self) -> &'static str {
        match self {
            ForecastKind::DayAhead => "DA",
            ForecastKind::HourAhead => "HA",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastEntry {
    pub index: usize,
    pub day: u32,
    pub timestamp: DateTime<FixedOffset>,
    /// Model output before clamping.
    pub raw: f64,
    /// Clamped prediction.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSeries {
    pub kind: ForecastKind,
    /// Submission day `d` (day-ahead) or the day of the submission index
    /// (hour-ahead).
    pub day: u32,
    /// Last daylight index whose data is available at submission.
    pub issued_at: usize,
    /// Index of the parameter estimate used.
    pub estimate_index: usize,
    pub entries: Vec<ForecastEntry>,
}

impl ForecastSeries {
    /// `d` for day-ahead series, `k` for hour-ahead series.
    pub fn origin(&self) -> usize {
        match self.kind {
            ForecastKind::DayAhead => self.day as usize,
            ForecastKind::HourAhead => self.issued_at,
        }
    }

    /// Measured/forecast pairs, tagged with each target's day.
    pub fn pairs(&self, series: &DaylightSeries) -> Vec<DayPair> {
        self.entries
            .iter()
            .filter_map(|e| {
                series.observation(e.index).map(|o| DayPair {
                    day: e.day,
                    measured: o.power,
                    forecast: e.power,
                })
            })
            .collect()
    }
}

fn build_series(
    kind: ForecastKind,
    day: u32,
    issued_at: usize,
    estimate_index: usize,
    targets: &[usize],
    predictions: Vec<Option<f64>>,
    series: &DaylightSeries,
) -> ForecastSeries {
    let entries = targets
        .iter()
        .zip(predictions)
        .filter_map(|(&j, p)| {
            let raw = p?;
            let slot = series.slot(j)?;
            Some(ForecastEntry {
                index: j,
                day: slot.day,
                timestamp: slot.timestamp,
                raw,
                power: clamp_power(raw),
            })
        })
        .collect();
    ForecastSeries {
        kind,
        day,
        issued_at,
        estimate_index,
        entries,
    }
}

fn local_time_on(series: &DaylightSeries, day: u32, time: NaiveTime) -> Result<DateTime<FixedOffset>> {
    let span = series.calendar().day(day).ok_or(Error::DayOutOfRange(day))?;
    let offset = series.calendar().offset();
    offset
        .from_local_datetime(&span.date.and_time(time))
        .single()
        .ok_or_else(|| Error::Timestamp(format!("{} {time}", span.date)))
}

/// Day-ahead forecast submitted on day `d`: every daylight index of day
/// `d + 1`, using the estimate frozen at the end of day `d - 1`.
pub fn day_ahead(
    d: u32,
    series: &DaylightSeries,
    forecaster: &dyn PointForecaster,
    provider: &dyn WeatherProvider,
) -> Result<ForecastSeries> {
    let cal = series.calendar();
    let target = cal.day(d + 1).ok_or(Error::DayOutOfRange(d + 1))?;
    let estimate_index = cal.last_index_before(d).ok_or(Error::DayOutOfRange(d))?;
    let submission = local_time_on(
        series,
        d,
        NaiveTime::from_hms_opt(DA_SUBMISSION_HOUR, 0, 0).expect("valid time"),
    )?;
    let issued_at = cal.available_at(&submission).max(estimate_index);
    let targets: Vec<usize> = target.indices().collect();
    let predictions = forecaster.predict(series, &targets, issued_at, estimate_index, provider)?;
    Ok(build_series(
        ForecastKind::DayAhead,
        d,
        issued_at,
        estimate_index,
        &targets,
        predictions,
        series,
    ))
}

/// Start of the first operating hour at least [`HA_LEAD_MINUTES`] after the
/// start of sample `k`.
pub fn operating_hour_start(t: &DateTime<FixedOffset>) -> DateTime<FixedOffset> {
    let earliest = *t + Duration::minutes(HA_LEAD_MINUTES);
    let floored = earliest
        - Duration::minutes(i64::from(earliest.minute()))
        - Duration::seconds(i64::from(earliest.second()))
        - Duration::nanoseconds(i64::from(earliest.nanosecond()));
    if floored == earliest {
        floored
    } else {
        floored + Duration::hours(1)
    }
}

/// Daylight indices of the hour-ahead horizon `𝒦_HA(k)`: same-day samples in
/// the seven hours starting at the operating hour.
pub fn hour_ahead_window(series: &DaylightSeries, k: usize) -> Result<Vec<usize>> {
    let slot = series.slot(k).ok_or(Error::MissingEstimate(k))?;
    let span = series
        .calendar()
        .day(slot.day)
        .ok_or(Error::DayOutOfRange(slot.day))?;
    let start = operating_hour_start(&slot.timestamp);
    let end = start + Duration::hours(HA_HORIZON_HOURS);
    Ok((k + 1..=span.last())
        .filter(|&j| {
            let t = series.slot(j).expect("index within day").timestamp;
            t >= start && t < end
        })
        .collect())
}

/// Hour-ahead forecast computed at daylight index `k` with the running
/// estimate `q = k`. Near dusk the window may be empty.
pub fn hour_ahead(
    k: usize,
    series: &DaylightSeries,
    forecaster: &dyn PointForecaster,
    provider: &dyn WeatherProvider,
) -> Result<ForecastSeries> {
    let targets = hour_ahead_window(series, k)?;
    let day = series.slot(k).expect("checked above").day;
    let predictions = if targets.is_empty() {
        Vec::new()
    } else {
        forecaster.predict(series, &targets, k, k, provider)?
    };
    Ok(build_series(
        ForecastKind::HourAhead,
        day,
        k,
        k,
        &targets,
        predictions,
        series,
    ))
}

/// One row of the forecast export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub model: String,
    pub kind: ForecastKind,
    pub origin: usize,
    pub j: usize,
    pub day: u32,
    pub timestamp: String,
    pub forecast_kw: f64,
    pub measured_kw: f64,
    pub q: usize,
}

pub fn forecast_records(model: &str, fs: &ForecastSeries, series: &DaylightSeries) -> Vec<ForecastRecord> {
    fs.entries
        .iter()
        .map(|e| ForecastRecord {
            model: model.to_string(),
            kind: fs.kind,
            origin: fs.origin(),
            j: e.index,
            day: e.day,
            timestamp: e.timestamp.to_rfc3339(),
            forecast_kw: e.power,
            measured_kw: series.observation(e.index).map_or(f64::NAN, |o| o.power),
            q: fs.estimate_index,
        })
        .collect()
}

pub fn write_forecast_csv<W: Write>(records: &[ForecastRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_forecast_csv<R: Read>(r: R) -> Result<Vec<ForecastRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let expected = [
        "model",
        "kind",
        "origin",
        "j",
        "day",
        "timestamp",
        "forecast_kw",
        "measured_kw",
        "q",
    ];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Schema {
            path: "<forecasts>".into(),
            detail: format!("expected header {expected:?}, got {headers:?}"),
        });
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}
