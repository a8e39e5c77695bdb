//! The autoregressive benchmarks next to the naive one-day persistence.

use pvcast::dataset::DaylightSeries;
use pvcast::experiment::{run_pipeline, simulate, ExperimentConfig, ModelKind};
use pvcast::forecast::ForecastKind;

fn main() -> pvcast::Result<()> {
    let cfg = ExperimentConfig {
        models: vec![ModelKind::Pvgm, ModelKind::Ccd, ModelKind::Odnp],
        ..Default::default()
    };
    let (_, data) = simulate(&cfg, 12, 0)?;
    let series = DaylightSeries::build(&data, &cfg.clear_sky_model()?)?;
    let out = run_pipeline(&series, &cfg)?;
    for kind in [ForecastKind::DayAhead, ForecastKind::HourAhead] {
        for m in &cfg.models {
            if let Some(metrics) = out.evaluation.metrics(m.name(), kind) {
                println!(
                    "{:<5} {}  RMSE {:>7.2} kW  R2 {:>7.4}",
                    m.name(),
                    kind.label(),
                    metrics.rmse,
                    metrics.r2
                );
            }
        }
    }
    for f in &out.fitted {
        let params = f.final_parameters();
        if !params.is_empty() {
            let text: Vec<String> = params.iter().map(|(n, v)| format!("{n}={v:.3}")).collect();
            println!("{} final: {}", f.kind().name(), text.join(" "));
        }
    }
    Ok(())
}
