//! Clear-sky irradiance on the reference panel over one summer day.

use chrono::{FixedOffset, TimeZone};
use pvcast::solar::{clear_sky_normal, solar_position, ClearSkyModel, GeoLocation, SurfaceOrientation};

fn main() -> pvcast::Result<()> {
    let location = GeoLocation::new(39.2, 9.1)?;
    let model = ClearSkyModel::new(location, SurfaceOrientation::guideline(&location));
    let tz = FixedOffset::east_opt(3600).unwrap();

    println!(
        "Icsn at 90 deg: {:.1} W/m2",
        clear_sky_normal(std::f64::consts::FRAC_PI_2)
    );
    println!(
        "Icsn at 30 deg: {:.1} W/m2",
        clear_sky_normal(std::f64::consts::FRAC_PI_6)
    );
    println!("hour  altitude  azimuth  I0 (W/m2)");
    for h in 5..=20 {
        let t = tz.with_ymd_and_hms(2015, 6, 21, h, 0, 0).unwrap();
        let pos = solar_position(&location, &t);
        println!(
            "{h:>4}  {:>8.2}  {:>7.2}  {:>9.1}",
            pos.altitude.to_degrees(),
            pos.azimuth.to_degrees(),
            model.at(&t)
        );
    }
    Ok(())
}
