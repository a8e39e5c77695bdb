//! Baseline predictors estimated online by least squares: a 12-lag
//! autoregression on power (PVGM) and a 2-lag ARX model on clear-sky
//! irradiance and cloud cover (CCD).
//!
//! Lags count daylight samples, so they run across night gaps. Neither model
//! has an intercept.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::SVector;

use crate::dataset::DaylightSeries;
use crate::error::{Error, Result};
use crate::estimation::RlsState;
use crate::forecast::{PointForecaster, WeatherProvider};

pub const PVGM_LAGS: usize = 12;
pub const CCD_LAGS: usize = 2;
pub const CCD_LEN: usize = 2 * (CCD_LAGS + 1);
/// Initial weight `V(0) = l·I`.
pub const DEFAULT_INITIAL_WEIGHT: f64 = 10.0;

pub type PvgmRegressor = SVector<f64, PVGM_LAGS>;
pub type CcdRegressor = SVector<f64, CCD_LEN>;

/// Coefficient history: entry `q` is the estimate after daylight sample `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientHistory<const N: usize> {
    pub coefficients: Vec<SVector<f64, N>>,
    /// Indices whose regressor could not be formed (short history, missing
    /// data) and left the estimate unchanged.
    pub skipped: Vec<usize>,
}

impl<const N: usize> CoefficientHistory<N> {
    pub fn get(&self, q: usize) -> Result<&SVector<f64, N>> {
        self.coefficients.get(q).ok_or(Error::MissingEstimate(q))
    }

    pub fn last(&self) -> &SVector<f64, N> {
        self.coefficients
            .last()
            .expect("history holds the initial estimate")
    }

    pub fn write_csv<W: Write>(&self, series: &DaylightSeries, prefix: &str, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["k".to_string(), "day".to_string(), "timestamp".to_string()];
        header.extend((1..=N).map(|i| format!("{prefix}{i}")));
        wr.write_record(&header)?;
        for (k, c) in self.coefficients.iter().enumerate() {
            let (day, ts) = series
                .slot(k)
                .map(|s| (s.day.to_string(), s.timestamp.to_rfc3339()))
                .unwrap_or_default();
            let mut rec = vec![k.to_string(), day, ts];
            rec.extend(c.iter().map(|v| v.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn estimate<const N: usize>(
    len: usize,
    initial_weight: f64,
    sample: impl Fn(usize) -> Option<(SVector<f64, N>, f64)>,
) -> CoefficientHistory<N> {
    let mut state = RlsState::<N>::new(SVector::zeros(), initial_weight);
    let mut coefficients = Vec::with_capacity(len + 1);
    let mut skipped = Vec::new();
    coefficients.push(state.theta);
    for k in 1..=len {
        match sample(k) {
            Some((x, y)) if x.iter().all(|v| v.is_finite()) && y.is_finite() => {
                state = state.step(&x, y).0;
            }
            _ => skipped.push(k),
        }
        coefficients.push(state.theta);
    }
    CoefficientHistory {
        coefficients,
        skipped,
    }
}

fn measured_power(series: &DaylightSeries, j: usize) -> Option<f64> {
    series.observation(j).map(|o| o.power)
}

/// `ψ(k) = [P(k−1) … P(k−12)]` from measurements.
pub fn pvgm_regressor(series: &DaylightSeries, k: usize) -> Option<PvgmRegressor> {
    if k <= PVGM_LAGS {
        return None;
    }
    let mut x = PvgmRegressor::zeros();
    for i in 1..=PVGM_LAGS {
        x[i - 1] = measured_power(series, k - i)?;
    }
    Some(x)
}

/// `ξ(k) = [I⁰(k), I⁰(k−1), I⁰(k−2), N(k), N(k−1), N(k−2)]` from
/// measurements.
pub fn ccd_regressor(series: &DaylightSeries, k: usize) -> Option<CcdRegressor> {
    if k <= CCD_LAGS {
        return None;
    }
    let mut x = CcdRegressor::zeros();
    for i in 0..=CCD_LAGS {
        x[i] = series.clear_sky(k - i)?;
        x[CCD_LAGS + 1 + i] = series.observation(k - i)?.cloud;
    }
    Some(x)
}

/// Power-only autoregressive benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvgm {
    pub history: CoefficientHistory<PVGM_LAGS>,
}

impl Pvgm {
    pub fn estimate(series: &DaylightSeries, initial_weight: f64) -> Self {
        let history = estimate(series.len(), initial_weight, |k| {
            Some((pvgm_regressor(series, k)?, measured_power(series, k)?))
        });
        Self { history }
    }

    /// A fixed coefficient vector used for every estimate index up to `len`.
    pub fn constant(a: PvgmRegressor, len: usize) -> Self {
        Self {
            history: CoefficientHistory {
                coefficients: vec![a; len + 1],
                skipped: Vec::new(),
            },
        }
    }
}

/// Recursive multi-step AR prediction. Lags at or before `issued_at` use
/// measurements, later lags use earlier predictions. Returns predictions
/// for every index in `issued_at + 1 ..= horizon_end`.
pub fn pvgm_recursive(
    series: &DaylightSeries,
    a: &PvgmRegressor,
    issued_at: usize,
    horizon_end: usize,
) -> HashMap<usize, Option<f64>> {
    let mut out: HashMap<usize, Option<f64>> = HashMap::new();
    for j in issued_at + 1..=horizon_end {
        let mut x = PvgmRegressor::zeros();
        let mut ok = j > PVGM_LAGS;
        if ok {
            for i in 1..=PVGM_LAGS {
                let lag = j - i;
                let v = if lag <= issued_at {
                    measured_power(series, lag)
                } else {
                    out.get(&lag).copied().flatten()
                };
                match v {
                    Some(v) => x[i - 1] = v,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        out.insert(j, ok.then(|| a.dot(&x)));
    }
    out
}

impl PointForecaster for Pvgm {
    fn name(&self) -> &str {
        "PVGM"
    }

    fn predict(
        &self,
        series: &DaylightSeries,
        targets: &[usize],
        issued_at: usize,
        estimate_index: usize,
        _provider: &dyn WeatherProvider,
    ) -> Result<Vec<Option<f64>>> {
        let a = self.history.get(estimate_index)?;
        let Some(&end) = targets.iter().max() else {
            return Ok(Vec::new());
        };
        let preds = pvgm_recursive(series, a, issued_at, end);
        Ok(targets.iter().map(|j| preds.get(j).copied().flatten()).collect())
    }
}

/// Cloud-cover/clear-sky ARX benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccd {
    pub history: CoefficientHistory<CCD_LEN>,
}

impl Ccd {
    pub fn estimate(series: &DaylightSeries, initial_weight: f64) -> Self {
        let history = estimate(series.len(), initial_weight, |k| {
            Some((ccd_regressor(series, k)?, measured_power(series, k)?))
        });
        Self { history }
    }

    pub fn constant(b: CcdRegressor, len: usize) -> Self {
        Self {
            history: CoefficientHistory {
                coefficients: vec![b; len + 1],
                skipped: Vec::new(),
            },
        }
    }
}

/// `b̂ᵀξ(j)` with cloud cover taken from measurements up to `issued_at` and
/// from the provider afterwards.
pub fn ccd_predict(
    series: &DaylightSeries,
    b: &CcdRegressor,
    j: usize,
    issued_at: usize,
    provider: &dyn WeatherProvider,
) -> Option<f64> {
    if j <= CCD_LAGS {
        return None;
    }
    let mut x = CcdRegressor::zeros();
    for i in 0..=CCD_LAGS {
        let lag = j - i;
        x[i] = series.clear_sky(lag)?;
        x[CCD_LAGS + 1 + i] = if lag <= issued_at {
            series.observation(lag)?.cloud
        } else {
            provider.forecast(lag, issued_at)?.cloud
        };
    }
    Some(b.dot(&x))
}

impl PointForecaster for Ccd {
    fn name(&self) -> &str {
        "CCD"
    }

    fn predict(
        &self,
        series: &DaylightSeries,
        targets: &[usize],
        issued_at: usize,
        estimate_index: usize,
        provider: &dyn WeatherProvider,
    ) -> Result<Vec<Option<f64>>> {
        let b = self.history.get(estimate_index)?;
        Ok(targets
            .iter()
            .map(|&j| ccd_predict(series, b, j, issued_at, provider))
            .collect())
    }
}
