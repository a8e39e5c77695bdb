//! Synthetic plant data: a seeded seasonal weather generator, the reference
//! plant, and the noise/quantization/averaging setups SID 0–12.

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveDate, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};

use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::model::{combined_power, ParamsN5, WeatherSample};
use crate::solar::{regular_grid, ClearSkyModel, GeoLocation, SurfaceOrientation};

/// Sampling period of the raw simulated series.
pub const RAW_PERIOD_MINUTES: u32 = 15;
pub const CLOUD_STEP: f64 = 0.1;
pub const TEMPERATURE_BOUNDS: (f64, f64) = (-10.0, 40.0);

/// The simulated reference plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueSystem {
    pub params: ParamsN5,
    pub location: GeoLocation,
    pub orientation: SurfaceOrientation,
    pub p_nom: f64,
}

impl Default for TrueSystem {
    fn default() -> Self {
        Self {
            params: ParamsN5 {
                gain: 0.92,
                irradiance_sq: -1.237e-4,
                irradiance_temp: -2.99e-3,
                cloud_linear: -0.3,
                cloud_quadratic: -0.25,
            },
            location: GeoLocation::new(39.2, 9.1).expect("valid location"),
            orientation: SurfaceOrientation::new(27.0, 0.0).expect("valid orientation"),
            p_nom: 920.0,
        }
    }
}

impl TrueSystem {
    pub fn clear_sky_model(&self) -> ClearSkyModel {
        ClearSkyModel::new(self.location, self.orientation)
    }

    /// Plant output for clear-sky irradiance `clear_sky` and weather `w`.
    pub fn power(&self, clear_sky: f64, w: &WeatherSample) -> Result<f64> {
        combined_power(clear_sky, w.temperature, w.cloud, &self.params)
    }
}

/// Parameters of the weather generator.
///
/// Cloud cover is a daily level drawn from a Beta distribution whose mean
/// follows the season (cloudier in winter), kept from one day to the next
/// with probability `persistence`, plus a within-day Ornstein–Uhlenbeck
/// deviation. Temperature is a seasonal sinusoid (coldest mid-January) plus
/// a diurnal sinusoid (warmest at 15:00, damped by clouds) plus AR(1) noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherGenerator {
    pub cloud_mean: f64,
    pub cloud_seasonal_amplitude: f64,
    pub cloud_concentration: f64,
    pub persistence: f64,
    pub cloud_ou_hours: f64,
    pub cloud_ou_std: f64,
    pub temperature_mean: f64,
    pub temperature_seasonal_amplitude: f64,
    pub temperature_diurnal_amplitude: f64,
    pub temperature_noise_std: f64,
    pub temperature_noise_hours: f64,
}

impl Default for WeatherGenerator {
    fn default() -> Self {
        Self {
            cloud_mean: 0.45,
            cloud_seasonal_amplitude: 0.2,
            cloud_concentration: 2.0,
            persistence: 0.5,
            cloud_ou_hours: 3.0,
            cloud_ou_std: 0.12,
            temperature_mean: 16.0,
            temperature_seasonal_amplitude: 8.0,
            temperature_diurnal_amplitude: 5.0,
            temperature_noise_std: 1.0,
            temperature_noise_hours: 6.0,
        }
    }
}

fn seasonal_phase(date: NaiveDate) -> f64 {
    // 1 in mid-January, -1 in mid-July
    (2.0 * std::f64::consts::PI * (f64::from(date.ordinal()) - 15.0) / 365.25).cos()
}

impl WeatherGenerator {
    /// Weather at each timestamp of `grid` (which must be increasing and
    /// regular with step `period_minutes`).
    pub fn generate(
        &self,
        grid: &[DateTime<FixedOffset>],
        period_minutes: u32,
        seed: u64,
    ) -> Vec<WeatherSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt_hours = f64::from(period_minutes) / 60.0;
        let cloud_rho = (-dt_hours / self.cloud_ou_hours).exp();
        let cloud_kick = self.cloud_ou_std * (1.0 - cloud_rho * cloud_rho).sqrt();
        let temp_rho = (-dt_hours / self.temperature_noise_hours).exp();
        let temp_kick = self.temperature_noise_std * (1.0 - temp_rho * temp_rho).sqrt();

        let mut level = 0.5;
        let mut current_date: Option<NaiveDate> = None;
        let mut cloud_dev = 0.0;
        let mut temp_dev = 0.0;
        let mut out = Vec::with_capacity(grid.len());
        for t in grid {
            let date = t.date_naive();
            if current_date != Some(date) {
                let fresh = current_date.is_none() || rng.random::<f64>() >= self.persistence;
                if fresh {
                    let mean = (self.cloud_mean + self.cloud_seasonal_amplitude * seasonal_phase(date))
                        .clamp(0.05, 0.95);
                    let a = (mean * self.cloud_concentration).max(0.2);
                    let b = ((1.0 - mean) * self.cloud_concentration).max(0.2);
                    level = Beta::new(a, b).expect("positive shape").sample(&mut rng);
                }
                current_date = Some(date);
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            cloud_dev = cloud_rho * cloud_dev + cloud_kick * z;
            let cloud = (level + cloud_dev).clamp(0.0, 1.0);

            let z: f64 = StandardNormal.sample(&mut rng);
            temp_dev = temp_rho * temp_dev + temp_kick * z;
            let hour = f64::from(t.hour()) + f64::from(t.minute()) / 60.0;
            let diurnal = (2.0 * std::f64::consts::PI * (hour - 15.0) / 24.0).cos();
            let temperature = self.temperature_mean
                - self.temperature_seasonal_amplitude * seasonal_phase(date)
                + self.temperature_diurnal_amplitude * (1.0 - 0.5 * cloud) * diurnal
                + temp_dev;
            out.push(WeatherSample {
                cloud,
                temperature: temperature.clamp(TEMPERATURE_BOUNDS.0, TEMPERATURE_BOUNDS.1),
            });
        }
        out
    }
}

/// Simulation horizon and weather seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSetup {
    pub year: i32,
    /// Civil time offset of the plant, hours east of UTC.
    pub utc_offset_hours: i32,
    pub weather_seed: u64,
    pub generator: WeatherGenerator,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        Self {
            year: 2015,
            utc_offset_hours: 1,
            weather_seed: 2015,
            generator: WeatherGenerator::default(),
        }
    }
}

impl SimulationSetup {
    pub fn offset(&self) -> Result<FixedOffset> {
        FixedOffset::east_opt(self.utc_offset_hours * 3600)
            .ok_or_else(|| Error::Config(format!("invalid UTC offset {}", self.utc_offset_hours)))
    }

    pub fn grid(&self) -> Result<Vec<DateTime<FixedOffset>>> {
        let first = NaiveDate::from_ymd_opt(self.year, 1, 1)
            .ok_or_else(|| Error::Config(format!("invalid year {}", self.year)))?;
        let last = NaiveDate::from_ymd_opt(self.year, 12, 31).expect("valid date");
        regular_grid(first, last, RAW_PERIOD_MINUTES, self.offset()?)
    }
}

/// Noise-free 15-minute year of plant data.
pub fn nominal_dataset(system: &TrueSystem, setup: &SimulationSetup) -> Result<Dataset> {
    let grid = setup.grid()?;
    let weather = setup
        .generator
        .generate(&grid, RAW_PERIOD_MINUTES, setup.weather_seed);
    let clear_sky = system.clear_sky_model();
    let samples = grid
        .iter()
        .zip(&weather)
        .map(|(t, w)| {
            let i0 = clear_sky.interval_mean(t, RAW_PERIOD_MINUTES);
            Ok(Sample {
                timestamp: *t,
                power: system.power(i0, w)?,
                temperature: w.temperature,
                cloud: w.cloud,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(RAW_PERIOD_MINUTES, samples))
}

/// Noise and processing applied to the nominal data. Noise levels are given
/// as three standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub sid: u32,
    pub cloud_3sigma: f64,
    pub power_3sigma: f64,
    pub temperature_3sigma: f64,
    pub quantize_cloud: bool,
    pub hourly_average: bool,
}

impl ScenarioConfig {
    pub const SIDS: std::ops::RangeInclusive<u32> = 0..=12;

    pub fn from_sid(sid: u32) -> Result<Self> {
        let (n, p, t) = match sid {
            0 | 1 => (0.0, 0.0, 0.0),
            2 => (0.0, 0.0, 0.0),
            3 => (0.1, 0.0, 0.0),
            4 => (0.5, 0.0, 0.0),
            5 => (1.0, 0.0, 0.0),
            6 => (0.0, 10.0, 0.0),
            7 => (0.0, 50.0, 0.0),
            8 => (0.0, 100.0, 0.0),
            9 => (0.0, 0.0, 1.0),
            10 => (0.0, 0.0, 3.0),
            11 => (0.0, 0.0, 5.0),
            12 => (0.3, 50.0, 3.0),
            other => return Err(Error::UnknownScenario(other)),
        };
        Ok(Self {
            sid,
            cloud_3sigma: n,
            power_3sigma: p,
            temperature_3sigma: t,
            quantize_cloud: sid >= 2,
            hourly_average: sid >= 1,
        })
    }

    pub fn description(&self) -> String {
        match self.sid {
            0 => "raw 15-min data, no noise".into(),
            1 => "hourly averages, no noise".into(),
            _ => format!(
                "3sigma N={}, P={} kW, T={} C; N quantized to {CLOUD_STEP}; hourly averages",
                self.cloud_3sigma, self.power_3sigma, self.temperature_3sigma
            ),
        }
    }

    pub fn is_noisy(&self) -> bool {
        self.cloud_3sigma > 0.0 || self.power_3sigma > 0.0 || self.temperature_3sigma > 0.0
    }
}

/// Rounds to the nearest multiple of [`CLOUD_STEP`].
pub fn quantize_cloud(n: f64) -> f64 {
    (n / CLOUD_STEP).round() * CLOUD_STEP
}

fn add_noise(rng: &mut ChaCha8Rng, value: f64, three_sigma: f64) -> f64 {
    if three_sigma > 0.0 {
        value
            + Normal::new(0.0, three_sigma / 3.0)
                .expect("finite sigma")
                .sample(rng)
    } else {
        value
    }
}

/// Noise on every channel, then cloud clamping and quantization, all at the
/// raw rate. Returns the noisy cloud cover before clamping alongside.
pub fn perturb(nominal: &Dataset, cfg: &ScenarioConfig, seed: u64) -> (Dataset, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unclamped = Vec::with_capacity(nominal.len());
    let samples = nominal
        .samples
        .iter()
        .map(|s| {
            let power = add_noise(&mut rng, s.power, cfg.power_3sigma);
            let temperature = add_noise(&mut rng, s.temperature, cfg.temperature_3sigma);
            let noisy_cloud = add_noise(&mut rng, s.cloud, cfg.cloud_3sigma);
            unclamped.push(noisy_cloud);
            let mut cloud = noisy_cloud.clamp(0.0, 1.0);
            if cfg.quantize_cloud {
                cloud = quantize_cloud(cloud);
            }
            Sample {
                timestamp: s.timestamp,
                power,
                temperature,
                cloud,
            }
        })
        .collect();
    (Dataset::new(nominal.period_minutes, samples), unclamped)
}

/// One sample per clock hour, equal to the mean of the samples inside it and
/// stamped at the start of the hour.
pub fn hourly_mean(ds: &Dataset) -> Result<Dataset> {
    if ds.period_minutes == 0 || 60 % ds.period_minutes != 0 {
        return Err(Error::Config(format!(
            "cannot average {}-min samples into hours",
            ds.period_minutes
        )));
    }
    let mut out: Vec<Sample> = Vec::new();
    let mut count = 0.0;
    let flush = |out: &mut Vec<Sample>, count: f64| {
        if let Some(last) = out.last_mut() {
            last.power /= count;
            last.temperature /= count;
            last.cloud /= count;
        }
    };
    for s in &ds.samples {
        let hour = s.timestamp
            - Duration::minutes(i64::from(s.timestamp.minute()))
            - Duration::seconds(i64::from(s.timestamp.second()));
        match out.last_mut() {
            Some(acc) if acc.timestamp == hour => {
                acc.power += s.power;
                acc.temperature += s.temperature;
                acc.cloud += s.cloud;
                count += 1.0;
            }
            _ => {
                flush(&mut out, count);
                out.push(Sample {
                    timestamp: hour,
                    ..*s
                });
                count = 1.0;
            }
        }
    }
    flush(&mut out, count);
    Ok(Dataset::new(60, out))
}

/// The processed dataset for one scenario and noise seed.
pub fn apply_scenario(nominal: &Dataset, cfg: &ScenarioConfig, seed: u64) -> Result<Dataset> {
    let (noisy, _) = perturb(nominal, cfg, seed);
    if cfg.hourly_average {
        hourly_mean(&noisy)
    } else {
        Ok(noisy)
    }
}

/// Independent noise seed for `(base, sid, run)`.
pub fn run_seed(base: u64, sid: u32, run: u32) -> u64 {
    // splitmix64 finalizer over a packed key
    let mut z = base
        .wrapping_add(u64::from(sid).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(u64::from(run).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
