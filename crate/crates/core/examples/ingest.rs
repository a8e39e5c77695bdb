//! Joining hourly plant records with irregular cloud cover reports.

use pvcast::ingest::{merge_hourly, read_cci_csv, read_power_csv, CciScale};

const POWER: &str = "timestamp,power_kw,temp_c
2016-05-10T08:00:00+01:00,210.5,16.0
2016-05-10T09:00:00+01:00,402.0,17.5
2016-05-10T10:00:00+01:00,555.1,19.0
2016-05-10T11:00:00+01:00,640.8,20.5
2016-05-10T12:00:00+01:00,n/a,21.0
";

const CCI: &str = "timestamp,cci
2016-05-10T08:10:00+01:00,3
2016-05-10T08:55:00+01:00,5
2016-05-10T10:00:00+01:00,2
2016-05-10T11:30:00+01:00,9
2016-05-10T11:45:00+01:00,1
";

fn main() -> pvcast::Result<()> {
    let power = read_power_csv(POWER.as_bytes(), "power")?;
    let cci = read_cci_csv(CCI.as_bytes(), "cci", CciScale::Okta)?;
    let (ds, mut report) = merge_hourly(&power.records, &cci.records);
    report.power_rows += power.unparseable;
    report.power_unparseable = power.unparseable;
    report.cci_rows += cci.unparseable;
    report.cci_unparseable = cci.unparseable;
    ds.write_csv(std::io::stdout())?;
    println!("{}", report.to_json());
    Ok(())
}
