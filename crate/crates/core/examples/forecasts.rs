//! Day-ahead and hour-ahead forecasts of the N5 model for one day.

use pvcast::dataset::DaylightSeries;
use pvcast::estimation::{init_from_params, run_estimation, InitConfig};
use pvcast::experiment::{simulate, ExperimentConfig};
use pvcast::forecast::{day_ahead, hour_ahead, ParametricForecaster, ReplayProvider};
use pvcast::simulator::TrueSystem;

fn main() -> pvcast::Result<()> {
    let cfg = ExperimentConfig::default();
    let (_, data) = simulate(&cfg, 12, 0)?;
    let series = DaylightSeries::build(&data, &cfg.clear_sky_model()?)?;
    let (n5, _, _) = init_from_params(
        &TrueSystem::default().params.scaled(0.75),
        &InitConfig::simulation(),
    );
    let trajectory = run_estimation(n5, &series)?;
    let model = ParametricForecaster::new("N5", trajectory.thetas());
    let provider = ReplayProvider::new(&series);

    let d = 180;
    let da = day_ahead(d, &series, &model, &provider)?;
    println!("DA submitted day {d}, estimate q = {}", da.estimate_index);
    for e in &da.entries {
        let measured = series.observation(e.index).map_or(f64::NAN, |o| o.power);
        println!(
            "  {}  forecast {:>7.1}  measured {:>7.1}",
            e.timestamp.format("%m-%d %H:%M"),
            e.power,
            measured
        );
    }

    let k = series.calendar().day(d + 1).expect("day in data").first + 2;
    let ha = hour_ahead(k, &series, &model, &provider)?;
    println!(
        "HA issued at index {k} ({})",
        series.slot(k).unwrap().timestamp.format("%H:%M")
    );
    for e in &ha.entries {
        println!("  {}  forecast {:>7.1}", e.timestamp.format("%H:%M"), e.power);
    }
    Ok(())
}
