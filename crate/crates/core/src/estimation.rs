//! Online parameter estimation: an extended Kalman filter for the nonlinear
//! N5/N6 parameterizations and recursive least squares for the linear L model.
//!
//! Both estimators treat the parameters as a constant state; each daylight
//! sample triggers exactly one measurement update.

use std::io::Write;
use std::marker::PhantomData;

use log::warn;
use nalgebra::{SMatrix, SVector};

use crate::dataset::DaylightSeries;
use crate::error::{Error, Result};
use crate::model::{
    theta_n5, Parameterization, ParamsN5, Regressor, ThetaVector, ETA2_RANGE, ETA3_RANGE, N5, N6, THETA_LEN,
};

/// Estimator initialization following the plant-agnostic guidelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    /// Nominal plant power, kW.
    pub p_nom: f64,
    /// Climate prior for the linear cloud cover factor coefficient.
    pub cloud_linear_prior: f64,
    /// Climate prior for the quadratic cloud cover factor coefficient.
    pub cloud_quadratic_prior: f64,
    /// Initial covariance (EKF) or weight (RLS) scale `l(0)`.
    pub initial_scale: f64,
    /// Measurement noise variance `r`, kW².
    pub noise_variance: f64,
    /// RLS forgetting factor; 1 disables forgetting.
    pub forgetting: f64,
}

impl Default for InitConfig {
    /// Real-data defaults: 920 kW plant, Italian climate CCF priors,
    /// `l(0) = 10`, `r = 1e4`.
    fn default() -> Self {
        Self {
            p_nom: 920.0,
            cloud_linear_prior: 0.784,
            cloud_quadratic_prior: -1.344,
            initial_scale: 10.0,
            noise_variance: 1e4,
            forgetting: 1.0,
        }
    }
}

impl InitConfig {
    /// Settings for the synthetic-data runs: `l(0) = 0.01`, `r = 1e4`.
    pub fn simulation() -> Self {
        Self {
            initial_scale: 0.01,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("nominal power", self.p_nom, self.p_nom > 0.0, "> 0"),
            (
                "initial scale",
                self.initial_scale,
                self.initial_scale > 0.0,
                "> 0",
            ),
            (
                "noise variance",
                self.noise_variance,
                self.noise_variance > 0.0,
                "> 0",
            ),
            (
                "forgetting factor",
                self.forgetting,
                self.forgetting > 0.0 && self.forgetting <= 1.0,
                "(0, 1]",
            ),
        ];
        for (what, value, ok, expected) in checks {
            if !ok {
                return Err(Error::OutOfRange {
                    what,
                    value,
                    expected,
                });
            }
        }
        Ok(())
    }

    /// Initial N5 guess: gain from nominal power, correction terms at the
    /// centre of their typical ranges, cloud coefficients from the priors.
    pub fn initial_params(&self) -> ParamsN5 {
        let gain = self.p_nom / 1000.0;
        ParamsN5 {
            gain,
            irradiance_sq: midpoint(ETA2_RANGE) * gain,
            irradiance_temp: midpoint(ETA3_RANGE) * gain,
            cloud_linear: self.cloud_linear_prior,
            cloud_quadratic: self.cloud_quadratic_prior,
        }
    }
}

fn midpoint((lo, hi): (f64, f64)) -> f64 {
    0.5 * (lo + hi)
}

/// Common interface of the online estimators driven by [`run_estimation`].
pub trait Estimator: Clone + Send + Sync {
    /// One measurement update; returns the a-priori innovation.
    fn update(&mut self, phi: &Regressor, measured: f64, index: usize) -> Result<f64>;

    /// Current regression parameters.
    fn theta(&self) -> ThetaVector;

    fn parameters(&self) -> Vec<f64>;

    fn parameter_names(&self) -> Vec<&'static str>;
}

/// EKF state for a `P`-parameter nonlinear model.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfState<M, const P: usize> {
    pub mu: SVector<f64, P>,
    pub covariance: SMatrix<f64, P, P>,
    pub noise_variance: f64,
    _model: PhantomData<M>,
}

pub type EkfN5 = EkfState<N5, 5>;
pub type EkfN6 = EkfState<N6, 6>;

impl<M: Parameterization<P>, const P: usize> EkfState<M, P> {
    pub fn new(mu: SVector<f64, P>, initial_scale: f64, noise_variance: f64) -> Self {
        Self {
            mu,
            covariance: SMatrix::<f64, P, P>::identity() * initial_scale,
            noise_variance,
            _model: PhantomData,
        }
    }

    /// Output sensitivity `∂(φᵀθ(μ))/∂μ` at the current estimate.
    pub fn output_jacobian(&self, phi: &Regressor) -> SMatrix<f64, 1, P> {
        phi.transpose() * M::jacobian(&self.mu)
    }

    /// One measurement update. Fails if the innovation variance is not
    /// strictly positive and finite; the state is left untouched in that case.
    pub fn step(&self, phi: &Regressor, measured: f64, index: usize) -> Result<(Self, f64)> {
        let h = self.output_jacobian(phi);
        let s = (h * self.covariance * h.transpose())[(0, 0)] + self.noise_variance;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InnovationVariance { value: s, index });
        }
        let innovation = measured - phi.dot(&M::theta(&self.mu));
        let gain: SVector<f64, P> = self.covariance * h.transpose() / s;
        let mu = self.mu + gain * innovation;
        let updated = (SMatrix::<f64, P, P>::identity() - gain * h) * self.covariance;
        let covariance = (updated + updated.transpose()) * 0.5;
        Ok((
            Self {
                mu,
                covariance,
                noise_variance: self.noise_variance,
                _model: PhantomData,
            },
            innovation,
        ))
    }
}

impl<M: Parameterization<P>, const P: usize> Estimator for EkfState<M, P> {
    fn update(&mut self, phi: &Regressor, measured: f64, index: usize) -> Result<f64> {
        let (next, innovation) = self.step(phi, measured, index)?;
        *self = next;
        Ok(innovation)
    }

    fn theta(&self) -> ThetaVector {
        M::theta(&self.mu)
    }

    fn parameters(&self) -> Vec<f64> {
        self.mu.iter().copied().collect()
    }

    fn parameter_names(&self) -> Vec<&'static str> {
        M::parameter_names().to_vec()
    }
}

/// RLS state over an `N`-dimensional linear regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsState<const N: usize> {
    pub theta: SVector<f64, N>,
    pub weight: SMatrix<f64, N, N>,
    pub forgetting: f64,
}

impl<const N: usize> RlsState<N> {
    pub fn new(theta: SVector<f64, N>, initial_scale: f64) -> Self {
        Self {
            theta,
            weight: SMatrix::<f64, N, N>::identity() * initial_scale,
            forgetting: 1.0,
        }
    }

    pub fn with_forgetting(mut self, forgetting: f64) -> Self {
        self.forgetting = forgetting;
        self
    }

    pub fn predict(&self, phi: &SVector<f64, N>) -> f64 {
        phi.dot(&self.theta)
    }

    /// One RLS update; returns the new state and the a-priori residual.
    pub fn step(&self, phi: &SVector<f64, N>, measured: f64) -> (Self, f64) {
        let v_phi = self.weight * phi;
        let denom = self.forgetting + phi.dot(&v_phi);
        let weight = (self.weight - v_phi * v_phi.transpose() / denom) / self.forgetting;
        let weight = (weight + weight.transpose()) * 0.5;
        let residual = measured - self.predict(phi);
        // equals V(k)·φ, without the cancellation in V(k)
        let gain = v_phi / denom;
        (
            Self {
                theta: self.theta + gain * residual,
                weight,
                forgetting: self.forgetting,
            },
            residual,
        )
    }
}

/// The linear over-parameterized model: θ estimated directly.
pub type RlsL = RlsState<THETA_LEN>;

impl Estimator for RlsState<THETA_LEN> {
    fn update(&mut self, phi: &Regressor, measured: f64, _index: usize) -> Result<f64> {
        let (next, residual) = self.step(phi, measured);
        *self = next;
        Ok(residual)
    }

    fn theta(&self) -> ThetaVector {
        self.theta
    }

    fn parameters(&self) -> Vec<f64> {
        self.theta.iter().copied().collect()
    }

    fn parameter_names(&self) -> Vec<&'static str> {
        vec![
            "theta1", "theta2", "theta3", "theta4", "theta5", "theta6", "theta7", "theta8", "theta9",
            "theta10", "theta11",
        ]
    }
}

pub fn init_n5(cfg: &InitConfig) -> EkfN5 {
    EkfN5::new(
        cfg.initial_params().to_vector(),
        cfg.initial_scale,
        cfg.noise_variance,
    )
}

pub fn init_n6(cfg: &InitConfig) -> EkfN6 {
    EkfN6::new(
        cfg.initial_params().to_n6().to_vector(),
        cfg.initial_scale,
        cfg.noise_variance,
    )
}

pub fn init_l(cfg: &InitConfig) -> RlsL {
    RlsL::new(theta_n5(&cfg.initial_params()), cfg.initial_scale).with_forgetting(cfg.forgetting)
}

/// Initial states from an explicit parameter guess instead of the guidelines.
pub fn init_from_params(guess: &ParamsN5, cfg: &InitConfig) -> (EkfN5, EkfN6, RlsL) {
    (
        EkfN5::new(guess.to_vector(), cfg.initial_scale, cfg.noise_variance),
        EkfN6::new(guess.to_n6().to_vector(), cfg.initial_scale, cfg.noise_variance),
        RlsL::new(theta_n5(guess), cfg.initial_scale).with_forgetting(cfg.forgetting),
    )
}

/// Estimate history: `states[k]` is the estimate after daylight sample `k`
/// (`states[0]` is the initial guess).
#[derive(Debug, Clone)]
pub struct Trajectory<E> {
    pub states: Vec<E>,
    /// Innovation at each daylight index (NaN where the sample was skipped);
    /// `innovations[k - 1]` belongs to sample `k`.
    pub innovations: Vec<f64>,
    /// Daylight indices skipped because of non-finite data.
    pub skipped: Vec<usize>,
}

impl<E: Estimator> Trajectory<E> {
    pub fn state(&self, q: usize) -> Option<&E> {
        self.states.get(q)
    }

    pub fn last(&self) -> &E {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn thetas(&self) -> Vec<ThetaVector> {
        self.states.iter().map(Estimator::theta).collect()
    }

    /// CSV with columns `k,day,tod,<parameters>,innovation`.
    pub fn write_csv<W: Write>(&self, series: &DaylightSeries, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["k".to_string(), "day".into(), "tod".into()];
        header.extend(self.last().parameter_names().iter().map(|s| s.to_string()));
        header.push("innovation".into());
        wr.write_record(&header)?;
        for (k, state) in self.states.iter().enumerate() {
            let (day, tod) = match series.slot(k) {
                Some(s) => (s.day.to_string(), s.timestamp.format("%H:%M").to_string()),
                None => (String::new(), String::new()),
            };
            let mut row = vec![k.to_string(), day, tod];
            row.extend(state.parameters().iter().map(|v| v.to_string()));
            row.push(
                k.checked_sub(1)
                    .map(|i| self.innovations[i].to_string())
                    .unwrap_or_default(),
            );
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Runs `initial` over every daylight sample of `series` in time order.
///
/// Samples with non-finite power, temperature or cloud cover are skipped
/// (the estimate is carried over unchanged) and logged.
pub fn run_estimation<E: Estimator>(initial: E, series: &DaylightSeries) -> Result<Trajectory<E>> {
    let n = series.len();
    let mut states = Vec::with_capacity(n + 1);
    let mut innovations = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    let mut current = initial;
    states.push(current.clone());
    for k in 1..=n {
        let obs = series.observation(k).expect("index in range");
        let phi = series.regressor(k).expect("index in range");
        if !obs.is_finite() || phi.iter().any(|x| !x.is_finite()) {
            skipped.push(k);
            innovations.push(f64::NAN);
        } else {
            innovations.push(current.update(&phi, obs.power, k)?);
        }
        states.push(current.clone());
    }
    if !skipped.is_empty() {
        warn!(
            "skipped {} daylight samples with non-finite data (first at index {})",
            skipped.len(),
            skipped[0]
        );
    }
    Ok(Trajectory {
        states,
        innovations,
        skipped,
    })
}
