//! Forecast error measures.
//!
//! Every measure is computed over the pairs with strictly positive measured
//! and forecast power; see [`EvaluationSet::new`].

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    measured: Vec<f64>,
    forecast: Vec<f64>,
    p_nom: f64,
}

impl EvaluationSet {
    /// Keeps only pairs with `measured > 0` and `forecast > 0` (this also
    /// drops NaNs).
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>, p_nom: f64) -> Self {
        let (measured, forecast) = pairs.into_iter().filter(|&(m, f)| m > 0.0 && f > 0.0).unzip();
        Self {
            measured,
            forecast,
            p_nom,
        }
    }

    pub fn len(&self) -> usize {
        self.measured.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measured.is_empty()
    }

    pub fn p_nom(&self) -> f64 {
        self.p_nom
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.measured.iter().copied().zip(self.forecast.iter().copied())
    }

    fn require(&self, min: usize, metric: &'static str) -> Result<f64> {
        if self.len() < min {
            return Err(Error::UndefinedMetric {
                metric,
                reason: if min == 1 {
                    "no valid pairs"
                } else {
                    "fewer than two valid pairs"
                },
            });
        }
        Ok(self.len() as f64)
    }

    fn sse(&self) -> f64 {
        self.pairs().map(|(m, f)| (m - f) * (m - f)).sum()
    }

    fn sst(&self) -> f64 {
        let mean = self.measured.iter().sum::<f64>() / self.len() as f64;
        self.measured.iter().map(|m| (m - mean) * (m - mean)).sum()
    }

    pub fn rmse(&self) -> Result<f64> {
        let k = self.require(1, "RMSE")?;
        Ok((self.sse() / k).sqrt())
    }

    /// Mean bias `measured - forecast`; positive means under-forecast.
    pub fn mbe(&self) -> Result<f64> {
        let k = self.require(1, "MBE")?;
        Ok(self.pairs().map(|(m, f)| m - f).sum::<f64>() / k)
    }

    /// Percent.
    pub fn mape(&self) -> Result<f64> {
        let k = self.require(1, "MAPE")?;
        Ok(self.pairs().map(|(m, f)| ((m - f) / m).abs()).sum::<f64>() / k * 100.0)
    }

    fn sst_checked(&self, metric: &'static str) -> Result<f64> {
        self.require(2, metric)?;
        let sst = self.sst();
        if sst <= 0.0 {
            return Err(Error::UndefinedMetric {
                metric,
                reason: "measured power has zero variance",
            });
        }
        Ok(sst)
    }

    /// Determination coefficient; may be negative.
    pub fn r2(&self) -> Result<f64> {
        let sst = self.sst_checked("R2")?;
        Ok(1.0 - self.sse() / sst)
    }

    /// `sqrt(SSE / SST)`, equal to `sqrt(1 - R²)` whenever that is defined.
    pub fn nrmse(&self) -> Result<f64> {
        let sst = self.sst_checked("NRMSE")?;
        Ok((self.sse() / sst).sqrt())
    }

    pub fn rmse_np(&self) -> Result<f64> {
        Ok(self.rmse()? / self.p_nom)
    }

    /// Percent of nominal power.
    pub fn mape_np(&self) -> Result<f64> {
        let k = self.require(1, "MAPE_NP")?;
        Ok(self
            .pairs()
            .map(|(m, f)| ((m - f) / self.p_nom).abs())
            .sum::<f64>()
            / k
            * 100.0)
    }

    pub fn summary(&self) -> Result<Metrics> {
        Ok(Metrics {
            rmse: self.rmse()?,
            mape: self.mape()?,
            mbe: self.mbe()?,
            r2: self.r2()?,
            nrmse: self.nrmse()?,
            rmse_np: self.rmse_np()?,
            mape_np: self.mape_np()?,
            count: self.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mape: f64,
    pub mbe: f64,
    pub r2: f64,
    pub nrmse: f64,
    pub rmse_np: f64,
    pub mape_np: f64,
    pub count: usize,
}

impl Metrics {
    pub const NAMES: [&'static str; 7] = ["RMSE", "MAPE", "MBE", "R2", "NRMSE", "RMSE_NP", "MAPE_NP"];

    pub fn values(&self) -> [f64; 7] {
        [
            self.rmse,
            self.mape,
            self.mbe,
            self.r2,
            self.nrmse,
            self.rmse_np,
            self.mape_np,
        ]
    }

    /// Component-wise mean; `None` for an empty slice.
    pub fn mean(all: &[Metrics]) -> Option<Metrics> {
        if all.is_empty() {
            return None;
        }
        let n = all.len() as f64;
        let avg = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        Some(Metrics {
            rmse: avg(|m| m.rmse),
            mape: avg(|m| m.mape),
            mbe: avg(|m| m.mbe),
            r2: avg(|m| m.r2),
            nrmse: avg(|m| m.nrmse),
            rmse_np: avg(|m| m.rmse_np),
            mape_np: avg(|m| m.mape_np),
            count: all.iter().map(|m| m.count).sum::<usize>() / all.len(),
        })
    }
}

/// One forecast/measurement pair tagged with the day it pertains to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayPair {
    pub day: u32,
    pub measured: f64,
    pub forecast: f64,
}

/// RMSE per day over the valid pairs of that day; days without a valid pair
/// are omitted.
pub fn rmse_daily(pairs: &[DayPair], p_nom: f64) -> Vec<(u32, f64)> {
    let mut by_day: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for p in pairs {
        by_day.entry(p.day).or_default().push((p.measured, p.forecast));
    }
    by_day
        .into_iter()
        .filter_map(|(day, v)| EvaluationSet::new(v, p_nom).rmse().ok().map(|r| (day, r)))
        .collect()
}

/// Sample standard deviation (n - 1 denominator).
pub fn power_std(measured: &[f64]) -> Result<f64> {
    if measured.len() < 2 {
        return Err(Error::UndefinedMetric {
            metric: "power standard deviation",
            reason: "fewer than two samples",
        });
    }
    let n = measured.len() as f64;
    let mean = measured.iter().sum::<f64>() / n;
    let ss: f64 = measured.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

/// A metrics table row set: `(model, kind, metrics)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub model: String,
    pub kind: String,
    pub metrics: Metrics,
}

/// CSV with one row per `(model, kind, metric)`.
pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["model", "kind", "metric", "value"])?;
    for row in rows {
        for (name, value) in Metrics::NAMES.iter().zip(row.metrics.values()) {
            wr.write_record([row.model.as_str(), row.kind.as_str(), name, &value.to_string()])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_example() {
        let set = EvaluationSet::new([(100.0, 90.0), (200.0, 220.0)], 920.0);
        assert_relative_eq!(set.rmse().unwrap(), 250f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(set.rmse().unwrap(), 15.811, epsilon = 5e-4);
        assert_relative_eq!(set.mbe().unwrap(), -5.0, epsilon = 1e-12);
        assert_relative_eq!(set.mape().unwrap(), 10.0, epsilon = 1e-12);
        assert_relative_eq!(set.rmse_np().unwrap(), 0.017186, epsilon = 1e-6);
        assert_relative_eq!(set.mape_np().unwrap(), 1.630, epsilon = 1e-3);
    }

    #[test]
    fn perfect_forecast() {
        let set = EvaluationSet::new([(1.0, 1.0), (5.0, 5.0), (3.0, 3.0)], 10.0);
        let m = set.summary().unwrap();
        assert_eq!((m.rmse, m.mbe, m.mape, m.r2, m.nrmse), (0.0, 0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn mean_predictor_has_zero_r2() {
        let measured = [1.0, 2.0, 6.0];
        let set = EvaluationSet::new(measured.iter().map(|&m| (m, 3.0)), 10.0);
        assert_relative_eq!(set.r2().unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(set.nrmse().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_r2_keeps_nrmse_defined() {
        let set = EvaluationSet::new([(1.0, 5.0), (2.0, 0.5), (3.0, 9.0)], 10.0);
        let r2 = set.r2().unwrap();
        assert!(r2 < 0.0);
        assert_relative_eq!(set.nrmse().unwrap(), (1.0 - r2).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn positive_pair_filter() {
        let set = EvaluationSet::new(
            [(0.0, 3.0), (2.0, 0.0), (-1.0, 1.0), (f64::NAN, 1.0), (4.0, 5.0)],
            1.0,
        );
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn undefined_cases() {
        let empty = EvaluationSet::new(Vec::<(f64, f64)>::new(), 1.0);
        assert!(empty.rmse().is_err());
        assert!(empty.mape().is_err());
        let flat = EvaluationSet::new([(2.0, 1.0), (2.0, 3.0)], 1.0);
        assert!(flat.r2().is_err());
        assert!(flat.nrmse().is_err());
        let one = EvaluationSet::new([(2.0, 1.0)], 1.0);
        assert!(one.r2().is_err());
        assert!(one.rmse().is_ok());
    }

    #[test]
    fn daily_rmse() {
        let pairs = [
            DayPair {
                day: 3,
                measured: 10.0,
                forecast: 10.0,
            },
            DayPair {
                day: 3,
                measured: 20.0,
                forecast: 20.0,
            },
            DayPair {
                day: 4,
                measured: 10.0,
                forecast: 13.0,
            },
            DayPair {
                day: 5,
                measured: 0.0,
                forecast: 13.0,
            },
        ];
        assert_eq!(rmse_daily(&pairs, 1.0), vec![(3, 0.0), (4, 3.0)]);
    }

    #[test]
    fn std_values() {
        assert_eq!(power_std(&[4.0, 4.0, 4.0]).unwrap(), 0.0);
        assert_relative_eq!(power_std(&[0.0, 2.0]).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert!(power_std(&[1.0]).is_err());
    }

    #[test]
    fn metrics_csv_layout() {
        let m = EvaluationSet::new([(100.0, 90.0), (200.0, 220.0)], 920.0)
            .summary()
            .unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(
            &[MetricsRow {
                model: "N5".into(),
                kind: "DA".into(),
                metrics: m,
            }],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.contains("N5,DA,MBE,-5\n"));
    }
}
