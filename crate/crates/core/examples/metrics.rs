use pvcast::metrics::EvaluationSet;

fn main() -> pvcast::Result<()> {
    // (measured, forecast) in kW; zero measurements are excluded
    let pairs = [
        (120.0, 110.0),
        (480.0, 500.0),
        (730.0, 690.0),
        (0.0, 15.0),
        (310.0, 330.0),
    ];
    let set = EvaluationSet::new(pairs, 920.0);
    let m = set.summary()?;
    println!("pairs used {}", m.count);
    println!("RMSE {:.3} kW  MAPE {:.3}%  MBE {:.3} kW", m.rmse, m.mape, m.mbe);
    println!("R2 {:.4}  NRMSE {:.4}", m.r2, m.nrmse);
    println!("RMSE_NP {:.5}  MAPE_NP {:.3}%", m.rmse_np, m.mape_np);
    Ok(())
}
