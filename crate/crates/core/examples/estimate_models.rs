//! Online estimation of the N5, N6 and L models on a simulated year, compared
//! with the true plant parameters.

use pvcast::dataset::DaylightSeries;
use pvcast::estimation::{init_from_params, run_estimation, Estimator, InitConfig};
use pvcast::experiment::{simulate, ExperimentConfig};
use pvcast::simulator::TrueSystem;

fn main() -> pvcast::Result<()> {
    let cfg = ExperimentConfig::default();
    let (_, data) = simulate(&cfg, 1, 0)?;
    let series = DaylightSeries::build(&data, &cfg.clear_sky_model()?)?;
    let truth = TrueSystem::default().params;

    let (n5, n6, l) = init_from_params(&truth.scaled(0.75), &InitConfig::simulation());
    let n5 = run_estimation(n5, &series)?;
    let n6 = run_estimation(n6, &series)?;
    let l = run_estimation(l, &series)?;

    println!("{} daylight samples", series.len());
    println!("param   true          N5            N6");
    let n6p = n6.last().parameters();
    for (i, (name, t)) in ["mu1", "mu2", "mu3", "mu4", "mu5"]
        .iter()
        .zip(truth.to_vector().iter())
        .enumerate()
    {
        println!(
            "{name:<6} {t:>12.5e}  {:>12.5e}  {:>12.5e}",
            n5.last().parameters()[i],
            n6p[i]
        );
    }
    println!("N6 mu6  {:>12.5e}", n6p[5]);
    println!("theta   true          L");
    for (i, (t, e)) in truth.theta().iter().zip(l.last().theta().iter()).enumerate() {
        println!("{:<6} {t:>12.5e}  {e:>12.5e}", i + 1);
    }
    Ok(())
}
