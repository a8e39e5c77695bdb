use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pvcast::dataset::{Dataset, DaylightSeries};
use pvcast::experiment::{
    evaluate_records, run_monte_carlo, run_pipeline, simulate, write_evaluation, write_pipeline,
    ExperimentConfig, Manifest,
};
use pvcast::forecast::read_forecast_csv;
use pvcast::ingest::{ingest_files, CciScale};
use pvcast::metrics::{write_metrics_csv, MetricsRow};
use pvcast::simulator::ScenarioConfig;
use pvcast::{Error, Result};

/// PV model estimation and day-ahead / hour-ahead forecasting.
#[derive(Parser)]
#[command(name = "pvcast", version)]
struct Cli {
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    /// Base settings: `simulation` or `real`.
    #[arg(long, global = true, default_value = "simulation")]
    preset: String,
    /// key = value configuration file applied over the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a single setting (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the nominal year and one processed scenario dataset.
    Simulate {
        #[arg(long)]
        sid: Option<u32>,
        /// Noise realization index.
        #[arg(long, default_value_t = 0)]
        run: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge power records and cloud cover reports into an hourly dataset.
    Ingest {
        #[arg(long)]
        power: PathBuf,
        #[arg(long)]
        cci: PathBuf,
        /// Cloud cover is given in oktas (0-8).
        #[arg(long)]
        okta: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate, forecast and evaluate all configured models.
    Run {
        #[command(flatten)]
        source: Source,
        /// Monte Carlo runs over independent noise seeds (simulation only).
        #[arg(long)]
        runs: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics from a forecast file.
    Evaluate {
        #[arg(long)]
        forecasts: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time estimation plus forecasting per model.
    Bench {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args)]
struct Source {
    /// Dataset CSV; otherwise the configured scenario is simulated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    sid: Option<u32>,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::preset(&cli.preset)?;
    if let Some(path) = &cli.config {
        cfg = ExperimentConfig::load(path, cfg)?;
    }
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {o:?}")))?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn apply_source(cfg: &mut ExperimentConfig, source: &Source) {
    if let Some(sid) = source.sid {
        cfg.sid = sid;
    }
    if let Some(input) = &source.input {
        cfg.input = Some(input.clone());
    }
}

fn load_series(cfg: &ExperimentConfig) -> Result<DaylightSeries> {
    let ds = match &cfg.input {
        Some(path) => Dataset::load(path, None)?,
        None => simulate(cfg, cfg.sid, 0)?.1,
    };
    DaylightSeries::build(&ds, &cfg.clear_sky_model()?)
}

fn finish(dir: &Path, command: &str, cfg: &ExperimentConfig, files: Vec<String>) -> Result<()> {
    let mut manifest = Manifest::new(command, cfg);
    manifest.files = files;
    manifest.write(dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn print_rows(rows: &[MetricsRow]) {
    println!(
        "{:<6} {:<3} {:>9} {:>8} {:>9} {:>8} {:>7} {:>8} {:>8}",
        "model", "", "RMSE", "MAPE%", "MBE", "R2", "NRMSE", "RMSE_NP", "MAPE_NP%"
    );
    for r in rows {
        let m = &r.metrics;
        println!(
            "{:<6} {:<3} {:>9.3} {:>8.3} {:>9.3} {:>8.4} {:>7.4} {:>8.5} {:>8.3}",
            r.model, r.kind, m.rmse, m.mape, m.mbe, m.r2, m.nrmse, m.rmse_np, m.mape_np
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    let Some(command) = cli.command else {
        if cli.show_config {
            print!("{}", cfg.to_text());
            return Ok(());
        }
        return Err(Error::Config("no subcommand given (see --help)".into()));
    };
    match &command {
        Command::Run { source, .. } | Command::Bench { source } => apply_source(&mut cfg, source),
        Command::Simulate { sid: Some(sid), .. } => cfg.sid = *sid,
        _ => {}
    }
    if let Command::Run { runs: Some(r), .. } = command {
        cfg.runs = r;
    }
    if cli.show_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    cfg.validate()?;

    match command {
        Command::Simulate { run, out, .. } => {
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            std::fs::create_dir_all(&dir)?;
            let (nominal, processed) = simulate(&cfg, cfg.sid, run)?;
            let name = format!("sid{:02}_run{run}.csv", cfg.sid);
            nominal.save(&dir.join("nominal.csv"))?;
            processed.save(&dir.join(&name))?;
            println!(
                "SID {}: {} ({} samples)",
                cfg.sid,
                ScenarioConfig::from_sid(cfg.sid)?.description(),
                processed.len()
            );
            finish(&dir, "simulate", &cfg, vec!["nominal.csv".into(), name])
        }
        Command::Ingest {
            power,
            cci,
            okta,
            out,
        } => {
            let scale = if okta { CciScale::Okta } else { CciScale::Fraction };
            let (ds, report) = ingest_files(&power, &cci, scale)?;
            ds.save(&out)?;
            let report_path = out.with_extension("quality.json");
            std::fs::write(&report_path, report.to_json() + "\n")?;
            println!("{}", report.to_json());
            println!("wrote {} ({} hours)", out.display(), ds.len());
            Ok(())
        }
        Command::Run { out, .. } => {
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            std::fs::create_dir_all(&dir)?;
            if cfg.runs > 1 && cfg.input.is_none() {
                let mc = run_monte_carlo(&cfg, cfg.sid, cfg.runs)?;
                let mut files = Vec::new();
                for r in &mc.runs {
                    let name = format!("metrics_run{}.csv", r.run);
                    write_metrics_csv(&r.evaluation.rows, std::fs::File::create(dir.join(&name))?)?;
                    files.push(name);
                }
                write_metrics_csv(&mc.mean, std::fs::File::create(dir.join("metrics_mean.csv"))?)?;
                files.push("metrics_mean.csv".into());
                println!("SID {} mean over {} runs", mc.sid, mc.runs.len());
                print_rows(&mc.mean);
                finish(&dir, "run", &cfg, files)
            } else {
                let series = load_series(&cfg)?;
                let result = run_pipeline(&series, &cfg)?;
                let files = write_pipeline(&result, &series, &dir)?;
                print_rows(&result.evaluation.rows);
                println!("power std {:.3} kW", result.evaluation.power_std);
                finish(&dir, "run", &cfg, files)
            }
        }
        Command::Evaluate { forecasts, out } => {
            let records = read_forecast_csv(std::fs::File::open(&forecasts)?)?;
            let eval = evaluate_records(&records, cfg.p_nom, cfg.eval_start_day, cfg.daily_start_day)?;
            print_rows(&eval.rows);
            println!("power std {:.3} kW", eval.power_std);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                let files = write_evaluation(&eval, &dir)?;
                finish(&dir, "evaluate", &cfg, files)?;
            }
            Ok(())
        }
        Command::Bench { .. } => {
            let series = load_series(&cfg)?;
            let result = run_pipeline(&series, &cfg)?;
            println!("{} daylight samples", series.len());
            for (kind, t) in result.timings {
                println!("{:<6} {:>10.3} ms", kind.name(), t.as_secs_f64() * 1e3);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
