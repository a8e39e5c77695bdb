//! Mean forecast indices over independent noise realizations of one scenario.
//!
//! Usage: `cargo run --release --example monte_carlo -- [SID] [RUNS]`

use pvcast::experiment::{run_monte_carlo, ExperimentConfig, ModelKind};
use pvcast::forecast::ForecastKind;
use pvcast::simulator::ScenarioConfig;

fn main() -> pvcast::Result<()> {
    let mut args = std::env::args().skip(1);
    let sid: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(12);
    let runs: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let cfg = ExperimentConfig {
        models: vec![ModelKind::N5, ModelKind::L, ModelKind::Odnp],
        ..Default::default()
    };

    println!("SID {sid}: {}", ScenarioConfig::from_sid(sid)?.description());
    let mc = run_monte_carlo(&cfg, sid, runs)?;
    for r in &mc.runs {
        let n5 = r
            .evaluation
            .metrics("N5", ForecastKind::DayAhead)
            .expect("N5 evaluated");
        println!("run {} seed {:#018x}  N5 DA RMSE {:.2}", r.run, r.seed, n5.rmse);
    }
    for row in &mc.mean {
        println!(
            "mean {:<5} {}  RMSE {:>7.2}  R2 {:.4}",
            row.model, row.kind, row.metrics.rmse, row.metrics.r2
        );
    }
    Ok(())
}
