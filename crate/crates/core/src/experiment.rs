//! Experiment configuration and the end-to-end pipeline: estimation of every
//! model, day-ahead and hour-ahead forecasts, evaluation, Monte Carlo runs
//! and output files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::benchmarks::{Ccd, Pvgm};
use crate::dataset::{Dataset, DaylightSeries};
use crate::error::{Error, Result};
use crate::estimation::{init_from_params, run_estimation, EkfN5, EkfN6, InitConfig, RlsL, Trajectory};
use crate::forecast::{
    day_ahead, forecast_records, hour_ahead, ForecastKind, ForecastRecord, Odnp, ParametricForecaster,
    PointForecaster, ReplayProvider,
};
use crate::metrics::{power_std, rmse_daily, DayPair, EvaluationSet, Metrics, MetricsRow};
use crate::simulator::{
    apply_scenario, nominal_dataset, run_seed, ScenarioConfig, SimulationSetup, TrueSystem,
};
use crate::solar::{ClearSkyModel, GeoLocation, SurfaceOrientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    N5,
    N6,
    L,
    Pvgm,
    Ccd,
    Odnp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::N5,
        ModelKind::N6,
        ModelKind::L,
        ModelKind::Pvgm,
        ModelKind::Ccd,
        ModelKind::Odnp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::N5 => "N5",
            ModelKind::N6 => "N6",
            ModelKind::L => "L",
            ModelKind::Pvgm => "PVGM",
            ModelKind::Ccd => "CCD",
            ModelKind::Odnp => "ODNP",
        }
    }

    /// The naive predictor is only meaningful one day ahead.
    pub fn supports(&self, kind: ForecastKind) -> bool {
        !(matches!(self, ModelKind::Odnp) && kind == ForecastKind::HourAhead)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

/// Starting point of the physical-model estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGuess {
    /// Nominal-power gain, mid-range corrections, climate cloud priors.
    Guideline,
    /// A fraction of the simulated plant's true parameters.
    TrueFraction(f64),
}

impl std::fmt::Display for InitialGuess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialGuess::Guideline => write!(f, "guideline"),
            InitialGuess::TrueFraction(x) => write!(f, "true*{x}"),
        }
    }
}

impl FromStr for InitialGuess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("guideline") {
            return Ok(InitialGuess::Guideline);
        }
        s.strip_prefix("true*")
            .and_then(|x| x.trim().parse::<f64>().ok())
            .filter(|x| x.is_finite() && *x > 0.0)
            .map(InitialGuess::TrueFraction)
            .ok_or_else(|| {
                Error::Config(format!(
                    "initial_guess must be `guideline` or `true*<factor>`, got {s:?}"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p_nom: f64,
    pub latitude: f64,
    pub longitude: f64,
    /// Surface tilt and azimuth in degrees; `None` selects the guideline
    /// orientation for the latitude.
    pub tilt: Option<f64>,
    pub azimuth: Option<f64>,
    pub utc_offset_hours: i32,
    pub models: Vec<ModelKind>,
    pub initial_guess: InitialGuess,
    pub initial_scale: f64,
    pub noise_variance: f64,
    pub forgetting: f64,
    pub cloud_linear_prior: f64,
    pub cloud_quadratic_prior: f64,
    pub benchmark_initial_weight: f64,
    /// First day counted in the summary indices.
    pub eval_start_day: u32,
    /// First day of the per-day RMSE series.
    pub daily_start_day: u32,
    pub year: i32,
    pub weather_seed: u64,
    pub noise_seed: u64,
    pub sid: u32,
    pub runs: u32,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// The synthetic-data study.
    fn default() -> Self {
        let sys = TrueSystem::default();
        Self {
            p_nom: sys.p_nom,
            latitude: sys.location.latitude(),
            longitude: sys.location.longitude(),
            tilt: Some(sys.orientation.tilt()),
            azimuth: Some(sys.orientation.azimuth()),
            utc_offset_hours: 1,
            models: ModelKind::ALL.to_vec(),
            initial_guess: InitialGuess::TrueFraction(0.75),
            initial_scale: 0.01,
            noise_variance: 1e4,
            forgetting: 1.0,
            cloud_linear_prior: 0.784,
            cloud_quadratic_prior: -1.344,
            benchmark_initial_weight: 10.0,
            eval_start_day: 18,
            daily_start_day: 15,
            year: 2015,
            weather_seed: 2015,
            noise_seed: 1,
            sid: 12,
            runs: 10,
            input: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_opt_f64(key: &str, value: &str) -> Result<Option<f64>> {
    if value.trim().eq_ignore_ascii_case("guideline") {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "guideline".to_string(), |x| x.to_string())
}

impl ExperimentConfig {
    /// Settings for measured plant data: guideline initial guess, `l(0) = 10`.
    pub fn real_data() -> Self {
        Self {
            initial_guess: InitialGuess::Guideline,
            initial_scale: 10.0,
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "simulation" => Ok(Self::default()),
            "real" => Ok(Self::real_data()),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (simulation, real)"
            ))),
        }
    }

    /// Sets one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "p_nom" => self.p_nom = parse(key, value)?,
            "latitude" => self.latitude = parse(key, value)?,
            "longitude" => self.longitude = parse(key, value)?,
            "tilt" => self.tilt = parse_opt_f64(key, value)?,
            "azimuth" => self.azimuth = parse_opt_f64(key, value)?,
            "utc_offset_hours" => self.utc_offset_hours = parse(key, value)?,
            "models" => {
                self.models = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "initial_guess" => self.initial_guess = value.parse()?,
            "initial_scale" => self.initial_scale = parse(key, value)?,
            "noise_variance" => self.noise_variance = parse(key, value)?,
            "forgetting" => self.forgetting = parse(key, value)?,
            "cloud_linear_prior" => self.cloud_linear_prior = parse(key, value)?,
            "cloud_quadratic_prior" => self.cloud_quadratic_prior = parse(key, value)?,
            "benchmark_initial_weight" => self.benchmark_initial_weight = parse(key, value)?,
            "eval_start_day" => self.eval_start_day = parse(key, value)?,
            "daily_start_day" => self.daily_start_day = parse(key, value)?,
            "year" => self.year = parse(key, value)?,
            "weather_seed" => self.weather_seed = parse(key, value)?,
            "noise_seed" => self.noise_seed = parse(key, value)?,
            "sid" => self.sid = parse(key, value)?,
            "runs" => self.runs = parse(key, value)?,
            "input" => {
                let v = value.trim();
                self.input = (!v.is_empty()).then(|| PathBuf::from(v));
            }
            "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a line-oriented `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path, base: Self) -> Result<Self> {
        let mut cfg = base;
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    /// Canonical `key = value` rendering, parseable by [`Self::apply_text`].
    pub fn to_text(&self) -> String {
        let models: Vec<&str> = self.models.iter().map(ModelKind::name).collect();
        let pairs: Vec<(&str, String)> = vec![
            ("p_nom", self.p_nom.to_string()),
            ("latitude", self.latitude.to_string()),
            ("longitude", self.longitude.to_string()),
            ("tilt", fmt_opt(self.tilt)),
            ("azimuth", fmt_opt(self.azimuth)),
            ("utc_offset_hours", self.utc_offset_hours.to_string()),
            ("models", models.join(",")),
            ("initial_guess", self.initial_guess.to_string()),
            ("initial_scale", self.initial_scale.to_string()),
            ("noise_variance", self.noise_variance.to_string()),
            ("forgetting", self.forgetting.to_string()),
            ("cloud_linear_prior", self.cloud_linear_prior.to_string()),
            ("cloud_quadratic_prior", self.cloud_quadratic_prior.to_string()),
            (
                "benchmark_initial_weight",
                self.benchmark_initial_weight.to_string(),
            ),
            ("eval_start_day", self.eval_start_day.to_string()),
            ("daily_start_day", self.daily_start_day.to_string()),
            ("year", self.year.to_string()),
            ("weather_seed", self.weather_seed.to_string()),
            ("noise_seed", self.noise_seed.to_string()),
            ("sid", self.sid.to_string()),
            ("runs", self.runs.to_string()),
            (
                "input",
                self.input
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
            ("output_dir", self.output_dir.display().to_string()),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        if self.eval_start_day == 0 || self.daily_start_day == 0 {
            return Err(Error::Config("day numbers start at 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.benchmark_initial_weight.is_nan() || self.benchmark_initial_weight <= 0.0 {
            return Err(Error::Config("benchmark_initial_weight must be > 0".into()));
        }
        ScenarioConfig::from_sid(self.sid)?;
        self.init_config().validate()?;
        self.clear_sky_model()?;
        Ok(())
    }

    pub fn location(&self) -> Result<GeoLocation> {
        GeoLocation::new(self.latitude, self.longitude)
    }

    pub fn orientation(&self) -> Result<SurfaceOrientation> {
        let loc = self.location()?;
        let guideline = SurfaceOrientation::guideline(&loc);
        SurfaceOrientation::new(
            self.tilt.unwrap_or(guideline.tilt()),
            self.azimuth.unwrap_or(guideline.azimuth()),
        )
    }

    pub fn clear_sky_model(&self) -> Result<ClearSkyModel> {
        Ok(ClearSkyModel::new(self.location()?, self.orientation()?))
    }

    pub fn init_config(&self) -> InitConfig {
        InitConfig {
            p_nom: self.p_nom,
            cloud_linear_prior: self.cloud_linear_prior,
            cloud_quadratic_prior: self.cloud_quadratic_prior,
            initial_scale: self.initial_scale,
            noise_variance: self.noise_variance,
            forgetting: self.forgetting,
        }
    }

    /// The simulated plant at the configured site.
    pub fn true_system(&self) -> Result<TrueSystem> {
        Ok(TrueSystem {
            location: self.location()?,
            orientation: self.orientation()?,
            p_nom: self.p_nom,
            ..TrueSystem::default()
        })
    }

    pub fn simulation_setup(&self) -> SimulationSetup {
        SimulationSetup {
            year: self.year,
            utc_offset_hours: self.utc_offset_hours,
            weather_seed: self.weather_seed,
            ..SimulationSetup::default()
        }
    }
}

/// An estimated model with its full history.
#[derive(Debug, Clone)]
pub enum FittedModel {
    N5(Trajectory<EkfN5>),
    N6(Trajectory<EkfN6>),
    L(Trajectory<RlsL>),
    Pvgm(Pvgm),
    Ccd(Ccd),
    Odnp,
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::N5(_) => ModelKind::N5,
            FittedModel::N6(_) => ModelKind::N6,
            FittedModel::L(_) => ModelKind::L,
            FittedModel::Pvgm(_) => ModelKind::Pvgm,
            FittedModel::Ccd(_) => ModelKind::Ccd,
            FittedModel::Odnp => ModelKind::Odnp,
        }
    }

    pub fn forecaster(&self) -> Box<dyn PointForecaster + '_> {
        let name = self.kind().name();
        match self {
            FittedModel::N5(t) => Box::new(ParametricForecaster::new(name, t.thetas())),
            FittedModel::N6(t) => Box::new(ParametricForecaster::new(name, t.thetas())),
            FittedModel::L(t) => Box::new(ParametricForecaster::new(name, t.thetas())),
            FittedModel::Pvgm(m) => Box::new(m.clone()),
            FittedModel::Ccd(m) => Box::new(m.clone()),
            FittedModel::Odnp => Box::new(Odnp),
        }
    }

    /// Final parameter values, if the model has any.
    pub fn final_parameters(&self) -> Vec<(String, f64)> {
        use crate::estimation::Estimator;
        fn named<E: Estimator>(e: &E) -> Vec<(String, f64)> {
            e.parameter_names()
                .into_iter()
                .map(String::from)
                .zip(e.parameters())
                .collect()
        }
        match self {
            FittedModel::N5(t) => named(t.last()),
            FittedModel::N6(t) => named(t.last()),
            FittedModel::L(t) => named(t.last()),
            FittedModel::Pvgm(m) => m
                .history
                .last()
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("a{}", i + 1), *v))
                .collect(),
            FittedModel::Ccd(m) => m
                .history
                .last()
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("b{}", i + 1), *v))
                .collect(),
            FittedModel::Odnp => Vec::new(),
        }
    }

    /// Writes the estimate history; `false` for models without one.
    pub fn write_trajectory(&self, series: &DaylightSeries, path: &Path) -> Result<bool> {
        let file = || std::fs::File::create(path);
        match self {
            FittedModel::N5(t) => t.write_csv(series, file()?)?,
            FittedModel::N6(t) => t.write_csv(series, file()?)?,
            FittedModel::L(t) => t.write_csv(series, file()?)?,
            FittedModel::Pvgm(m) => m.history.write_csv(series, "a", file()?)?,
            FittedModel::Ccd(m) => m.history.write_csv(series, "b", file()?)?,
            FittedModel::Odnp => return Ok(false),
        }
        Ok(true)
    }
}

/// Initial N5 parameters for the configured guess.
pub fn initial_guess(cfg: &ExperimentConfig) -> crate::model::ParamsN5 {
    match cfg.initial_guess {
        InitialGuess::Guideline => cfg.init_config().initial_params(),
        InitialGuess::TrueFraction(f) => TrueSystem::default().params.scaled(f),
    }
}

pub fn fit_model(kind: ModelKind, series: &DaylightSeries, cfg: &ExperimentConfig) -> Result<FittedModel> {
    let (n5, n6, l) = init_from_params(&initial_guess(cfg), &cfg.init_config());
    Ok(match kind {
        ModelKind::N5 => FittedModel::N5(run_estimation(n5, series)?),
        ModelKind::N6 => FittedModel::N6(run_estimation(n6, series)?),
        ModelKind::L => FittedModel::L(run_estimation(l, series)?),
        ModelKind::Pvgm => FittedModel::Pvgm(Pvgm::estimate(series, cfg.benchmark_initial_weight)),
        ModelKind::Ccd => FittedModel::Ccd(Ccd::estimate(series, cfg.benchmark_initial_weight)),
        ModelKind::Odnp => FittedModel::Odnp,
    })
}

/// Day-ahead series for every submission day whose target day is in the
/// data, plus one hour-ahead series per day issued at its first daylight
/// sample.
pub fn forecast_model(series: &DaylightSeries, fitted: &FittedModel) -> Result<Vec<ForecastRecord>> {
    let forecaster = fitted.forecaster();
    let provider = ReplayProvider::new(series);
    let name = fitted.kind().name();
    let cal = series.calendar();
    let mut out = Vec::new();
    for d in cal.first_day()..cal.last_day() {
        let fs = day_ahead(d, series, forecaster.as_ref(), &provider)?;
        out.extend(forecast_records(name, &fs, series));
    }
    if fitted.kind().supports(ForecastKind::HourAhead) {
        for span in cal.days().iter().filter(|s| !s.is_empty()) {
            let fs = hour_ahead(span.first, series, forecaster.as_ref(), &provider)?;
            out.extend(forecast_records(name, &fs, series));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyRmse {
    pub model: String,
    pub kind: String,
    pub day: u32,
    pub rmse: f64,
}

/// Everything derived from a set of forecast records.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rows: Vec<MetricsRow>,
    pub daily: Vec<DailyRmse>,
    /// Standard deviation of measured daylight power over the evaluation
    /// window.
    pub power_std: f64,
}

impl Evaluation {
    pub fn metrics(&self, model: &str, kind: ForecastKind) -> Option<&Metrics> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.kind == kind.label())
            .map(|r| &r.metrics)
    }
}

/// Summary indices over target days `>= eval_start_day`, per-day RMSE from
/// `daily_start_day`.
pub fn evaluate_records(
    records: &[ForecastRecord],
    p_nom: f64,
    eval_start_day: u32,
    daily_start_day: u32,
) -> Result<Evaluation> {
    let mut groups: BTreeMap<(String, ForecastKind), Vec<&ForecastRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.model.clone(), r.kind)).or_default().push(r);
    }
    let mut rows = Vec::new();
    let mut daily = Vec::new();
    for ((model, kind), recs) in &groups {
        let set = EvaluationSet::new(
            recs.iter()
                .filter(|r| r.day >= eval_start_day)
                .map(|r| (r.measured_kw, r.forecast_kw)),
            p_nom,
        );
        let metrics = set.summary().map_err(|e| Error::Context {
            context: format!("{model} {}", kind.label()),
            source: Box::new(e),
        })?;
        rows.push(MetricsRow {
            model: model.clone(),
            kind: kind.label().to_string(),
            metrics,
        });
        let pairs: Vec<DayPair> = recs
            .iter()
            .filter(|r| r.day >= daily_start_day)
            .map(|r| DayPair {
                day: r.day,
                measured: r.measured_kw,
                forecast: r.forecast_kw,
            })
            .collect();
        daily.extend(
            rmse_daily(&pairs, p_nom)
                .into_iter()
                .map(|(day, rmse)| DailyRmse {
                    model: model.clone(),
                    kind: kind.label().to_string(),
                    day,
                    rmse,
                }),
        );
    }
    let mut measured: BTreeMap<usize, f64> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.day >= eval_start_day && r.measured_kw.is_finite())
    {
        measured.insert(r.j, r.measured_kw);
    }
    let values: Vec<f64> = measured.into_values().collect();
    Ok(Evaluation {
        rows,
        daily,
        power_std: power_std(&values)?,
    })
}

/// Result of estimating, forecasting and evaluating every configured model.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub fitted: Vec<FittedModel>,
    pub records: Vec<ForecastRecord>,
    pub evaluation: Evaluation,
    /// Estimation plus forecasting time per model.
    pub timings: Vec<(ModelKind, Duration)>,
}

pub fn run_pipeline(series: &DaylightSeries, cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let results: Vec<(FittedModel, Vec<ForecastRecord>, Duration)> = cfg
        .models
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let fitted = fit_model(kind, series, cfg)?;
            let records = forecast_model(series, &fitted)?;
            Ok((fitted, records, start.elapsed()))
        })
        .collect::<Result<_>>()?;
    let mut fitted = Vec::new();
    let mut records = Vec::new();
    let mut timings = Vec::new();
    for (f, r, t) in results {
        timings.push((f.kind(), t));
        fitted.push(f);
        records.extend(r);
    }
    let evaluation = evaluate_records(&records, cfg.p_nom, cfg.eval_start_day, cfg.daily_start_day)?;
    Ok(PipelineOutput {
        fitted,
        records,
        evaluation,
        timings,
    })
}

/// Nominal year and the processed dataset of run `run` for scenario `sid`.
pub fn simulate(cfg: &ExperimentConfig, sid: u32, run: u32) -> Result<(Dataset, Dataset)> {
    let sys = cfg.true_system()?;
    let nominal = nominal_dataset(&sys, &cfg.simulation_setup())?;
    let scenario = ScenarioConfig::from_sid(sid)?;
    let processed = apply_scenario(&nominal, &scenario, run_seed(cfg.noise_seed, sid, run))?;
    Ok((nominal, processed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: u32,
    pub seed: u64,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub sid: u32,
    pub runs: Vec<RunResult>,
    /// Component-wise mean of each `(model, kind)` row across runs.
    pub mean: Vec<MetricsRow>,
}

impl MonteCarloSummary {
    pub fn mean_metrics(&self, model: &str, kind: ForecastKind) -> Option<&Metrics> {
        self.mean
            .iter()
            .find(|r| r.model == model && r.kind == kind.label())
            .map(|r| &r.metrics)
    }
}

/// `runs` independent noise realizations of scenario `sid` over a shared
/// nominal year, evaluated in parallel.
pub fn run_monte_carlo(cfg: &ExperimentConfig, sid: u32, runs: u32) -> Result<MonteCarloSummary> {
    cfg.validate()?;
    let sys = cfg.true_system()?;
    let nominal = nominal_dataset(&sys, &cfg.simulation_setup())?;
    let scenario = ScenarioConfig::from_sid(sid)?;
    let clear_sky = cfg.clear_sky_model()?;
    let results: Vec<RunResult> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(cfg.noise_seed, sid, run);
            let ds = apply_scenario(&nominal, &scenario, seed)?;
            let series = DaylightSeries::build(&ds, &clear_sky)?;
            let out = run_pipeline(&series, cfg)?;
            Ok(RunResult {
                run,
                seed,
                evaluation: out.evaluation,
            })
        })
        .collect::<Result<_>>()?;

    let keys: BTreeSet<(String, String)> = results
        .iter()
        .flat_map(|r| {
            r.evaluation
                .rows
                .iter()
                .map(|m| (m.model.clone(), m.kind.clone()))
        })
        .collect();
    let mean = keys
        .into_iter()
        .filter_map(|(model, kind)| {
            let all: Vec<Metrics> = results
                .iter()
                .filter_map(|r| {
                    r.evaluation
                        .rows
                        .iter()
                        .find(|m| m.model == model && m.kind == kind)
                        .map(|m| m.metrics)
                })
                .collect();
            Metrics::mean(&all).map(|metrics| MetricsRow { model, kind, metrics })
        })
        .collect();
    Ok(MonteCarloSummary {
        sid,
        runs: results,
        mean,
    })
}

/// Provenance record written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub config: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        let config = cfg
            .to_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut seeds = BTreeMap::new();
        seeds.insert("weather_seed".to_string(), cfg.weather_seed);
        seeds.insert("noise_seed".to_string(), cfg.noise_seed);
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256: cfg.sha256(),
            config,
            seeds,
            files: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        Ok(())
    }
}

pub fn write_daily_csv(daily: &[DailyRmse], path: &Path) -> Result<()> {
    let mut wr = csv::Writer::from_path(path)?;
    for d in daily {
        wr.serialize(d)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes metrics, per-day RMSE and the power-std reference into `dir`;
/// returns the file names.
pub fn write_evaluation(eval: &Evaluation, dir: &Path) -> Result<Vec<String>> {
    crate::metrics::write_metrics_csv(&eval.rows, std::fs::File::create(dir.join("metrics.csv"))?)?;
    write_daily_csv(&eval.daily, &dir.join("rmse_daily.csv"))?;
    std::fs::write(
        dir.join("reference.csv"),
        format!("quantity,value\npower_std_kw,{}\n", eval.power_std),
    )?;
    Ok(vec![
        "metrics.csv".into(),
        "rmse_daily.csv".into(),
        "reference.csv".into(),
    ])
}

/// Writes trajectories, forecasts and evaluation files into `dir`.
pub fn write_pipeline(out: &PipelineOutput, series: &DaylightSeries, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for f in &out.fitted {
        let name = format!("trajectory_{}.csv", f.kind().name());
        if f.write_trajectory(series, &dir.join(&name))? {
            files.push(name);
        }
    }
    crate::forecast::write_forecast_csv(&out.records, std::fs::File::create(dir.join("forecasts.csv"))?)?;
    files.push("forecasts.csv".into());
    files.extend(write_evaluation(&out.evaluation, dir)?);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trip() {
        let mut cfg = ExperimentConfig::real_data();
        cfg.tilt = None;
        cfg.models = vec![ModelKind::N5, ModelKind::Odnp];
        cfg.input = Some("data.csv".into());
        let mut back = ExperimentConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.sha256(), cfg.sha256());
    }

    #[test]
    fn config_errors() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply_text("bogus = 1").is_err());
        assert!(cfg.apply_text("sid").is_err());
        assert!(cfg.apply_text("models = N5,XX").is_err());
        assert!(cfg.apply_text("initial_guess = half").is_err());
        cfg.apply_text("# comment\nsid = 13\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            models: vec![],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn guideline_orientation_default() {
        let cfg = ExperimentConfig {
            tilt: None,
            azimuth: None,
            ..Default::default()
        };
        let o = cfg.orientation().unwrap();
        assert!((o.tilt() - 27.2).abs() < 1e-9);
        assert_eq!(o.azimuth(), 0.0);
    }

    #[test]
    fn model_names_parse() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!(!ModelKind::Odnp.supports(ForecastKind::HourAhead));
        assert!(ModelKind::Odnp.supports(ForecastKind::DayAhead));
    }
}
