//! Solar position, clear-sky irradiance and the daylight index calendar.
//!
//! Angles are radians internally; the public constructors for locations and
//! panel orientations take degrees. Azimuths (solar and surface) are measured
//! from south, positive towards west.

use std::f64::consts::{FRAC_PI_2, PI};

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveDate, TimeZone, Timelike, Utc};

use crate::error::{Error, Result};

/// Apparent extraterrestrial irradiance, W/m².
pub const EXTRATERRESTRIAL_IRRADIANCE: f64 = 1353.0;

const ATMOSPHERIC_TRANSMITTANCE: f64 = 0.7;
const AIR_MASS_EXPONENT: f64 = 0.678;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoLocation {
    latitude: f64,
    longitude: f64,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::OutOfRange {
                what: "latitude",
                value: latitude,
                expected: "[-90, 90] degrees",
            });
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::OutOfRange {
                what: "longitude",
                value: longitude,
                expected: "[-180, 180] degrees",
            });
        }
        Ok(Self { latitude, longitude })
    }

    pub fn latitude(&self) -> f64 {
        self.latitude
    }

    pub fn longitude(&self) -> f64 {
        self.longitude
    }
}

/// Panel tilt and surface azimuth, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceOrientation {
    tilt: f64,
    azimuth: f64,
}

impl SurfaceOrientation {
    pub fn new(tilt: f64, azimuth: f64) -> Result<Self> {
        if !(0.0..=90.0).contains(&tilt) {
            return Err(Error::OutOfRange {
                what: "surface tilt",
                value: tilt,
                expected: "[0, 90] degrees",
            });
        }
        if !(-180.0..=180.0).contains(&azimuth) {
            return Err(Error::OutOfRange {
                what: "surface azimuth",
                value: azimuth,
                expected: "[-180, 180] degrees",
            });
        }
        Ok(Self { tilt, azimuth })
    }

    pub fn horizontal() -> Self {
        Self {
            tilt: 0.0,
            azimuth: 0.0,
        }
    }

    /// Default orientation for a plant whose real orientation is unknown:
    /// equator-facing, tilted `|latitude| - 12°` clamped to `[10°, 40°]`.
    pub fn guideline(location: &GeoLocation) -> Self {
        let tilt = (location.latitude.abs() - 12.0).clamp(10.0, 40.0);
        let azimuth = if location.latitude >= 0.0 { 0.0 } else { 180.0 };
        Self { tilt, azimuth }
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }
}

/// Solar altitude above the horizon and azimuth (from south, positive west).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPosition {
    pub altitude: f64,
    pub azimuth: f64,
}

fn julian_day(t: DateTime<Utc>) -> f64 {
    let seconds = t.timestamp() as f64 + f64::from(t.timestamp_subsec_nanos()) * 1e-9;
    seconds / 86_400.0 + 2_440_587.5
}

/// Geometric sun position from the NOAA low-precision ephemeris
/// (declination, equation of time, hour angle). No refraction correction.
pub fn solar_position<Tz: TimeZone>(loc: &GeoLocation, t: &DateTime<Tz>) -> SolarPosition {
    let utc = t.with_timezone(&Utc);
    let jc = (julian_day(utc) - 2_451_545.0) / 36_525.0;

    let mean_long = (280.466_46 + jc * (36_000.769_83 + 0.000_303_2 * jc)).rem_euclid(360.0);
    let mean_anom = 357.529_11 + jc * (35_999.050_29 - 0.000_153_7 * jc);
    let ecc = 0.016_708_634 - jc * (0.000_042_037 + 0.000_000_126_7 * jc);
    let m = mean_anom.to_radians();
    let center = m.sin() * (1.914_602 - jc * (0.004_817 + 0.000_014 * jc))
        + (2.0 * m).sin() * (0.019_993 - 0.000_101 * jc)
        + (3.0 * m).sin() * 0.000_289;
    let true_long = mean_long + center;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let apparent_long = (true_long - 0.005_69 - 0.004_78 * omega.sin()).to_radians();

    let obliquity_mean =
        23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.000_59 - jc * 0.001_813))) / 60.0) / 60.0;
    let obliquity = (obliquity_mean + 0.002_56 * omega.cos()).to_radians();
    let declination = (obliquity.sin() * apparent_long.sin()).asin();

    let y = (obliquity / 2.0).tan().powi(2);
    let l0 = mean_long.to_radians();
    let eot_minutes = 4.0
        * (y * (2.0 * l0).sin() - 2.0 * ecc * m.sin() + 4.0 * ecc * y * m.sin() * (2.0 * l0).cos()
            - 0.5 * y * y * (4.0 * l0).sin()
            - 1.25 * ecc * ecc * (2.0 * m).sin())
        .to_degrees();

    let minutes_utc = f64::from(utc.num_seconds_from_midnight()) / 60.0
        + f64::from(utc.timestamp_subsec_nanos()) * 1e-9 / 60.0;
    let solar_minutes = minutes_utc + eot_minutes + 4.0 * loc.longitude;
    let hour_angle = (solar_minutes / 4.0 - 180.0).to_radians();

    let lat = loc.latitude.to_radians();
    let sin_alt = lat.sin() * declination.sin() + lat.cos() * declination.cos() * hour_angle.cos();
    let altitude = sin_alt.clamp(-1.0, 1.0).asin();
    let azimuth = hour_angle
        .sin()
        .atan2(hour_angle.cos() * lat.sin() - declination.tan() * lat.cos());

    SolarPosition { altitude, azimuth }
}

/// Clear-sky beam irradiance normal to the sun, W/m².
///
/// Zero when the sun is at or below the horizon.
pub fn clear_sky_normal(altitude: f64) -> f64 {
    if altitude > 0.0 && altitude <= FRAC_PI_2 {
        let air_mass = (1.0 / altitude.sin()).powf(AIR_MASS_EXPONENT);
        EXTRATERRESTRIAL_IRRADIANCE * ATMOSPHERIC_TRANSMITTANCE.powf(air_mass)
    } else {
        0.0
    }
}

/// Projects the normal irradiance onto a tilted surface, floored at zero when
/// the sun is behind the panel.
pub fn clear_sky_inclined(pos: &SolarPosition, orient: &SurfaceOrientation, normal: f64) -> f64 {
    let tilt = orient.tilt.to_radians();
    let surface_az = orient.azimuth.to_radians();
    let incidence =
        tilt.sin() * pos.altitude.cos() * (surface_az - pos.azimuth).cos() + tilt.cos() * pos.altitude.sin();
    (incidence * normal).max(0.0)
}

/// Theoretical clear-sky irradiance on the reference panel orientation at `t`.
pub fn reference_clear_sky<Tz: TimeZone>(
    loc: &GeoLocation,
    orient: &SurfaceOrientation,
    t: &DateTime<Tz>,
) -> f64 {
    let pos = solar_position(loc, t);
    clear_sky_inclined(&pos, orient, clear_sky_normal(pos.altitude))
}

/// Reference clear-sky irradiance for a plant, averaged over sampling
/// intervals.
///
/// A sample stamped `t` with period `τ` covers `[t, t + τ)`; its irradiance is
/// the mean of the instantaneous values at `t, t + s, t + 2s, …` where `s` is
/// `substep_minutes`. With `τ == s` this is the instantaneous value at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearSkyModel {
    pub location: GeoLocation,
    pub orientation: SurfaceOrientation,
    pub substep_minutes: u32,
}

impl ClearSkyModel {
    pub fn new(location: GeoLocation, orientation: SurfaceOrientation) -> Self {
        Self {
            location,
            orientation,
            substep_minutes: 15,
        }
    }

    pub fn at<Tz: TimeZone>(&self, t: &DateTime<Tz>) -> f64 {
        reference_clear_sky(&self.location, &self.orientation, t)
    }

    pub fn interval_mean<Tz: TimeZone>(&self, start: &DateTime<Tz>, period_minutes: u32) -> f64 {
        let step = self.substep_minutes.clamp(1, period_minutes.max(1));
        let n = (period_minutes / step).max(1);
        let sum: f64 = (0..n)
            .map(|i| {
                let t = start.clone() + Duration::minutes(i64::from(i * step));
                self.at(&t)
            })
            .sum();
        sum / f64::from(n)
    }
}

/// Calendar day number: days since January 1st of `base_year`, plus one.
pub fn day_number(date: NaiveDate, base_year: i32) -> u32 {
    let jan1 = NaiveDate::from_ymd_opt(base_year, 1, 1).expect("valid year");
    ((date - jan1).num_days() + 1).max(0) as u32
}

/// One daylight sample of the calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct DaylightSlot {
    pub timestamp: DateTime<FixedOffset>,
    pub day: u32,
    pub clear_sky: f64,
    /// Position of the sample in the source sequence (including night samples).
    pub source: usize,
}

/// Daylight index set of one day: `first ..= first + len - 1`.
///
/// An empty day (polar night, or a day missing from the data) has `len == 0`
/// and `first` equal to the next index to be assigned, so
/// [`DaySpan::last`] still yields the last daylight index before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DaySpan {
    pub day: u32,
    pub date: NaiveDate,
    pub first: usize,
    pub len: usize,
}

impl DaySpan {
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Last daylight index at or before the end of this day.
    pub fn last(&self) -> usize {
        self.first + self.len - 1
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.len
    }
}

/// Consecutive numbering of daylight samples across days.
///
/// Daylight indices start at 1; index 0 denotes "before any data" and is
/// where initial estimates live.
#[derive(Debug, Clone)]
pub struct DaylightCalendar {
    period_minutes: u32,
    base_year: i32,
    offset: FixedOffset,
    slots: Vec<DaylightSlot>,
    days: Vec<DaySpan>,
}

impl DaylightCalendar {
    /// Builds the calendar from sample timestamps (start of each sampling
    /// interval). Samples whose interval-mean clear-sky irradiance is zero are
    /// excluded. Timestamps must be strictly increasing.
    pub fn from_timestamps(
        model: &ClearSkyModel,
        timestamps: &[DateTime<FixedOffset>],
        period_minutes: u32,
    ) -> Result<Self> {
        let first = timestamps.first().ok_or(Error::Empty("timestamp sequence"))?;
        if period_minutes == 0 || 1440 % period_minutes != 0 {
            return Err(Error::Config(format!(
                "sampling period {period_minutes} min does not divide 24 h"
            )));
        }
        for (row, w) in timestamps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone { row: row + 1 });
            }
        }
        let base_year = first.date_naive().year();
        let first_date = first.date_naive();
        let last_date = timestamps[timestamps.len() - 1].date_naive();

        let mut slots = Vec::new();
        let mut days = Vec::new();
        let mut cursor = timestamps.iter().enumerate().peekable();
        let mut date = first_date;
        while date <= last_date {
            let span_first = slots.len() + 1;
            while let Some((source, t)) = cursor.peek() {
                if t.date_naive() != date {
                    break;
                }
                let clear_sky = model.interval_mean(*t, period_minutes);
                if clear_sky > 0.0 {
                    slots.push(DaylightSlot {
                        timestamp: **t,
                        day: day_number(date, base_year),
                        clear_sky,
                        source: *source,
                    });
                }
                cursor.next();
            }
            days.push(DaySpan {
                day: day_number(date, base_year),
                date,
                first: span_first,
                len: slots.len() + 1 - span_first,
            });
            date = date.succ_opt().expect("date in range");
        }

        Ok(Self {
            period_minutes,
            base_year,
            offset: *first.offset(),
            slots,
            days,
        })
    }

    pub fn period_minutes(&self) -> u32 {
        self.period_minutes
    }

    pub fn base_year(&self) -> i32 {
        self.base_year
    }

    /// Civil offset of the first timestamp; day boundaries follow it.
    pub fn offset(&self) -> FixedOffset {
        self.offset
    }

    /// Number of daylight samples.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Daylight sample `k` (1-based).
    pub fn slot(&self, k: usize) -> Option<&DaylightSlot> {
        k.checked_sub(1).and_then(|i| self.slots.get(i))
    }

    pub fn slots(&self) -> &[DaylightSlot] {
        &self.slots
    }

    pub fn days(&self) -> &[DaySpan] {
        &self.days
    }

    pub fn first_day(&self) -> u32 {
        self.days[0].day
    }

    pub fn last_day(&self) -> u32 {
        self.days[self.days.len() - 1].day
    }

    pub fn day(&self, d: u32) -> Option<&DaySpan> {
        let offset = d.checked_sub(self.first_day())? as usize;
        self.days.get(offset)
    }

    /// Days with no daylight sample (polar night or missing data).
    pub fn dark_days(&self) -> impl Iterator<Item = &DaySpan> {
        self.days.iter().filter(|s| s.is_empty())
    }

    /// Last daylight index of day `d - 1`, i.e. the last index strictly before
    /// day `d`; 0 when no daylight sample precedes day `d`.
    pub fn last_index_before(&self, d: u32) -> Option<usize> {
        self.day(d).map(|span| span.first - 1)
    }

    /// Number of daylight samples whose interval has ended by `t`.
    pub fn available_at(&self, t: &DateTime<FixedOffset>) -> usize {
        let period = Duration::minutes(i64::from(self.period_minutes));
        self.slots.partition_point(|s| s.timestamp + period <= *t)
    }
}

/// Calendar for a regular grid covering `first_day ..= last_day` in the
/// civil time zone `offset`.
pub fn daylight_calendar(
    model: &ClearSkyModel,
    first_day: NaiveDate,
    last_day: NaiveDate,
    period_minutes: u32,
    offset: FixedOffset,
) -> Result<DaylightCalendar> {
    if last_day < first_day {
        return Err(Error::Empty("day range"));
    }
    let grid = regular_grid(first_day, last_day, period_minutes, offset)?;
    DaylightCalendar::from_timestamps(model, &grid, period_minutes)
}

/// Timestamps every `period_minutes` from local midnight of `first_day` to the
/// last interval of `last_day`.
pub fn regular_grid(
    first_day: NaiveDate,
    last_day: NaiveDate,
    period_minutes: u32,
    offset: FixedOffset,
) -> Result<Vec<DateTime<FixedOffset>>> {
    if period_minutes == 0 || 1440 % period_minutes != 0 {
        return Err(Error::Config(format!(
            "sampling period {period_minutes} min does not divide 24 h"
        )));
    }
    let per_day = 1440 / period_minutes;
    let mut out = Vec::new();
    let mut date = first_day;
    while date <= last_day {
        let midnight = offset
            .from_local_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"))
            .single()
            .ok_or_else(|| Error::Timestamp(format!("{date} midnight")))?;
        for i in 0..per_day {
            out.push(midnight + Duration::minutes(i64::from(i * period_minutes)));
        }
        date = date.succ_opt().expect("date in range");
    }
    Ok(out)
}

/// Radians to degrees on the `(-π, π]` branch, for reporting.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn offset(h: i32) -> FixedOffset {
        FixedOffset::east_opt(h * 3600).unwrap()
    }

    #[test]
    fn normal_irradiance_anchor_values() {
        assert_eq!(clear_sky_normal(FRAC_PI_2), 1353.0 * 0.7);
        assert_relative_eq!(clear_sky_normal(FRAC_PI_2), 947.1, epsilon = 1e-9);
        assert_eq!(clear_sky_normal(0.0), 0.0);
        assert_eq!(clear_sky_normal(-0.3), 0.0);
        // 1353 * 0.7^(2^0.678), evaluated independently
        let expected = 1353.0 * (0.7f64.ln() * 2f64.powf(0.678)).exp();
        assert_relative_eq!(clear_sky_normal(PI / 6.0), expected, max_relative = 1e-14);
        // frozen from an independent 30-digit evaluation
        assert_relative_eq!(clear_sky_normal(PI / 6.0), 764.657_606_412_09, epsilon = 1e-8);
    }

    #[test]
    fn normal_irradiance_is_monotone_and_bounded() {
        let mut prev = 0.0;
        for i in 1..=1000 {
            let h = FRAC_PI_2 * f64::from(i) / 1000.0;
            let v = clear_sky_normal(h);
            assert!(v >= prev);
            assert!((0.0..=EXTRATERRESTRIAL_IRRADIANCE).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn inclined_reduces_to_horizontal() {
        let flat = SurfaceOrientation::horizontal();
        for &(alt, az) in &[(0.3, 0.1), (1.0, -2.0), (FRAC_PI_2, 0.0)] {
            let pos = SolarPosition {
                altitude: alt,
                azimuth: az,
            };
            assert_eq!(clear_sky_inclined(&pos, &flat, 800.0), alt.sin() * 800.0);
        }
    }

    #[test]
    fn inclined_direct_evaluation() {
        let orient = SurfaceOrientation::new(27.0, 0.0).unwrap();
        let pos = SolarPosition {
            altitude: 40f64.to_radians(),
            azimuth: 10f64.to_radians(),
        };
        let normal = clear_sky_normal(pos.altitude);
        // sin27 cos40 cos(-10) + cos27 sin40
        let factor = 0.453_990_499_739_546_8 * 0.766_044_443_118_978 * 0.984_807_753_012_208
            + 0.891_006_524_188_367_9 * 0.642_787_609_686_539_3;
        assert_relative_eq!(
            clear_sky_inclined(&pos, &orient, normal),
            factor * normal,
            max_relative = 1e-12
        );
    }

    #[test]
    fn inclined_floors_at_zero_behind_panel() {
        let orient = SurfaceOrientation::new(60.0, 0.0).unwrap();
        let pos = SolarPosition {
            altitude: 0.1,
            azimuth: PI,
        };
        assert_eq!(clear_sky_inclined(&pos, &orient, 500.0), 0.0);
    }

    #[test]
    fn equator_equinox_noon_is_near_zenith() {
        let loc = GeoLocation::new(0.0, 0.0).unwrap();
        // solar noon at Greenwich on 2015-03-20 is ~12:07 UTC (equation of time)
        let t = Utc.with_ymd_and_hms(2015, 3, 20, 12, 7, 0).unwrap();
        let pos = solar_position(&loc, &t);
        assert!((pos.altitude - FRAC_PI_2).abs() < 0.5f64.to_radians());
    }

    #[test]
    fn midnight_sun_is_below_horizon() {
        for &(lat, lon) in &[(39.2, 9.1), (-33.9, 151.2), (0.0, -60.0)] {
            let loc = GeoLocation::new(lat, lon).unwrap();
            // local solar midnight ≈ 00:00 UTC shifted by longitude
            let minutes = (-4.0 * lon).round() as i64;
            let t = Utc.with_ymd_and_hms(2015, 6, 21, 0, 0, 0).unwrap() + Duration::minutes(minutes);
            assert!(solar_position(&loc, &t).altitude < 0.0);
            assert_eq!(
                reference_clear_sky(&loc, &SurfaceOrientation::guideline(&loc), &t),
                0.0
            );
        }
    }

    #[test]
    fn azimuth_sign_convention() {
        let loc = GeoLocation::new(39.2, 9.1).unwrap();
        let morning = Utc.with_ymd_and_hms(2015, 6, 21, 7, 0, 0).unwrap();
        let afternoon = Utc.with_ymd_and_hms(2015, 6, 21, 15, 0, 0).unwrap();
        assert!(solar_position(&loc, &morning).azimuth < 0.0);
        assert!(solar_position(&loc, &afternoon).azimuth > 0.0);
    }

    #[test]
    fn day_profile_is_unimodal() {
        let loc = GeoLocation::new(39.0, 9.0).unwrap();
        let orient = SurfaceOrientation::guideline(&loc);
        let start = offset(1).with_ymd_and_hms(2015, 3, 21, 0, 0, 0).unwrap();
        let values: Vec<f64> = (0..96)
            .map(|i| reference_clear_sky(&loc, &orient, &(start + Duration::minutes(15 * i))))
            .collect();
        let peak = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(values[..peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(values[peak..].windows(2).all(|w| w[1] <= w[0]));
        // solar noon at 9°E in CET is ~12:31 local
        let peak_minutes = 15 * peak as i64;
        assert!((peak_minutes - 12 * 60 - 30).abs() <= 30, "{peak_minutes}");
    }

    #[test]
    fn guideline_orientation() {
        let o = SurfaceOrientation::guideline(&GeoLocation::new(39.2, 9.1).unwrap());
        assert_relative_eq!(o.tilt(), 27.2, epsilon = 1e-12);
        assert_eq!(o.azimuth(), 0.0);
        let eq = SurfaceOrientation::guideline(&GeoLocation::new(0.0, 0.0).unwrap());
        assert_eq!(eq.tilt(), 10.0);
        let south = SurfaceOrientation::guideline(&GeoLocation::new(-70.0, 0.0).unwrap());
        assert_eq!((south.tilt(), south.azimuth()), (40.0, 180.0));
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(GeoLocation::new(91.0, 0.0).is_err());
        assert!(GeoLocation::new(0.0, 181.0).is_err());
        assert!(SurfaceOrientation::new(-1.0, 0.0).is_err());
        assert!(SurfaceOrientation::new(10.0, 200.0).is_err());
    }

    #[test]
    fn polar_night_days_are_empty() {
        let loc = GeoLocation::new(80.0, 15.0).unwrap();
        let model = ClearSkyModel::new(loc, SurfaceOrientation::guideline(&loc));
        let d0 = NaiveDate::from_ymd_opt(2015, 12, 10).unwrap();
        let d1 = NaiveDate::from_ymd_opt(2015, 12, 12).unwrap();
        let cal = daylight_calendar(&model, d0, d1, 60, offset(1)).unwrap();
        assert!(cal.is_empty());
        assert_eq!(cal.dark_days().count(), 3);
        assert_eq!(cal.day(344).unwrap().first, 1);
    }

    #[test]
    fn equator_equinox_has_about_twelve_light_hours() {
        let loc = GeoLocation::new(0.0, 0.0).unwrap();
        let model = ClearSkyModel::new(loc, SurfaceOrientation::guideline(&loc));
        let d = NaiveDate::from_ymd_opt(2015, 3, 20).unwrap();
        let cal = daylight_calendar(&model, d, d, 60, offset(0)).unwrap();
        let n = cal.days()[0].len;
        assert!((11..=13).contains(&n), "{n}");
    }

    #[test]
    fn daylight_indices_are_consecutive_across_days() {
        let loc = GeoLocation::new(39.2, 9.1).unwrap();
        let model = ClearSkyModel::new(loc, SurfaceOrientation::guideline(&loc));
        let d0 = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let d1 = NaiveDate::from_ymd_opt(2015, 1, 31).unwrap();
        let cal = daylight_calendar(&model, d0, d1, 60, offset(1)).unwrap();
        assert_eq!(cal.days()[0].first, 1);
        for w in cal.days().windows(2) {
            assert_eq!(w[1].first, w[0].last() + 1);
        }
        assert!(cal.slots().iter().all(|s| s.clear_sky > 0.0));
        assert_eq!(cal.last_index_before(1), Some(0));
        assert_eq!(cal.last_index_before(2), Some(cal.days()[0].last()));
    }

    #[test]
    fn calendar_rejects_bad_inputs() {
        let loc = GeoLocation::new(39.2, 9.1).unwrap();
        let model = ClearSkyModel::new(loc, SurfaceOrientation::guideline(&loc));
        let d0 = NaiveDate::from_ymd_opt(2015, 1, 2).unwrap();
        let d1 = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        assert!(daylight_calendar(&model, d0, d1, 60, offset(1)).is_err());
        assert!(daylight_calendar(&model, d1, d0, 7, offset(1)).is_err());
        let t = offset(1).with_ymd_and_hms(2015, 1, 1, 12, 0, 0).unwrap();
        assert!(matches!(
            DaylightCalendar::from_timestamps(&model, &[t, t], 60),
            Err(Error::NonMonotone { row: 1 })
        ));
    }

    #[test]
    fn interval_mean_averages_substeps() {
        let loc = GeoLocation::new(39.2, 9.1).unwrap();
        let model = ClearSkyModel::new(loc, SurfaceOrientation::guideline(&loc));
        let t = offset(1).with_ymd_and_hms(2015, 5, 1, 10, 0, 0).unwrap();
        let manual = (0..4)
            .map(|i| model.at(&(t + Duration::minutes(15 * i))))
            .sum::<f64>()
            / 4.0;
        assert_relative_eq!(model.interval_mean(&t, 60), manual, max_relative = 1e-15);
        assert_eq!(model.interval_mean(&t, 15), model.at(&t));
    }
}
