use chrono::{DateTime, Duration, FixedOffset, TimeZone};
use nalgebra::{DMatrix, SMatrix, SVector};
use proptest::prelude::*;

use pvcast::estimation::{EkfN5, RlsState};
use pvcast::forecast::clamp_power;
use pvcast::ingest::{merge_hourly, CciRecord, PowerRecord};
use pvcast::metrics::EvaluationSet;
use pvcast::model::{combined_power, regressor, ParamsN5};
use pvcast::simulator::{quantize_cloud, CLOUD_STEP};

fn base() -> DateTime<FixedOffset> {
    FixedOffset::east_opt(3600)
        .unwrap()
        .with_ymd_and_hms(2016, 3, 1, 0, 0, 0)
        .unwrap()
}

fn power_records() -> impl Strategy<Value = Vec<PowerRecord>> {
    prop::collection::vec((0i64..72, 0.0..900.0f64, -5.0..35.0f64), 0..40).prop_map(|rows| {
        rows.into_iter()
            .map(|(h, p, t)| PowerRecord {
                timestamp: base() + Duration::hours(h),
                power: p,
                temperature: t,
            })
            .collect()
    })
}

fn cci_records() -> impl Strategy<Value = Vec<CciRecord>> {
    prop::collection::vec((0i64..72 * 60, -0.2..1.2f64), 0..60).prop_map(|rows| {
        rows.into_iter()
            .map(|(m, c)| CciRecord {
                timestamp: base() + Duration::minutes(m),
                cci: c,
            })
            .collect()
    })
}

fn params() -> impl Strategy<Value = ParamsN5> {
    (
        0.5..1.2f64,
        -2.5e-4..-1.9e-5f64,
        -4.8e-3..-1.7e-3f64,
        -1.0..1.0f64,
        -1.5..1.0f64,
    )
        .prop_map(|(a, b, c, d, e)| ParamsN5 {
            gain: a,
            irradiance_sq: b,
            irradiance_temp: c,
            cloud_linear: d,
            cloud_quadratic: e,
        })
}

fn min_eigenvalue<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    DMatrix::from_column_slice(N, N, m.as_slice())
        .symmetric_eigenvalues()
        .min()
}

proptest! {
    #[test]
    fn nrmse_squared_is_one_minus_r2(pairs in prop::collection::vec((1.0..900.0f64, 1.0..900.0f64), 2..200)) {
        let set = EvaluationSet::new(pairs, 920.0);
        if let (Ok(r2), Ok(nrmse)) = (set.r2(), set.nrmse()) {
            prop_assert!((nrmse * nrmse - (1.0 - r2)).abs() < 1e-9 * (1.0 + r2.abs()));
        }
        let rmse = set.rmse().unwrap();
        prop_assert!(rmse + 1e-12 >= set.mbe().unwrap().abs());
        prop_assert!((set.rmse_np().unwrap() * 920.0 - rmse).abs() < 1e-9 * (1.0 + rmse));
    }

    #[test]
    fn invalid_pairs_are_excluded(pairs in prop::collection::vec((-100.0..900.0f64, -100.0..900.0f64), 0..100)) {
        let set = EvaluationSet::new(pairs.iter().copied(), 920.0);
        let valid = pairs.iter().filter(|(m, f)| *m > 0.0 && *f > 0.0).count();
        prop_assert_eq!(set.len(), valid);
        prop_assert!(set.pairs().all(|(m, f)| m > 0.0 && f > 0.0));
    }

    #[test]
    fn clamped_power_is_nonnegative(raw in -1e4..1e4f64) {
        let p = clamp_power(raw);
        prop_assert!(p >= 0.0);
        prop_assert_eq!(clamp_power(p), p);
    }

    #[test]
    fn quantized_cloud_is_on_grid(n in 0.0..=1.0f64) {
        let q = quantize_cloud(n);
        prop_assert!((q - n).abs() <= CLOUD_STEP / 2.0 + 1e-12);
        prop_assert!((q / CLOUD_STEP - (q / CLOUD_STEP).round()).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&q));
    }

    #[test]
    fn combined_model_is_linear_in_theta(
        p in params(), i0 in 0.0..1100.0f64, t in -10.0..40.0f64, n in 0.0..=1.0f64,
    ) {
        let direct = combined_power(i0, t, n, &p).unwrap();
        let linear = regressor(i0, t, n).dot(&p.theta());
        prop_assert!((direct - linear).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn rls_weight_stays_symmetric_positive(
        rows in prop::collection::vec((prop::array::uniform3(-10.0..10.0f64), -50.0..50.0f64), 1..60),
        scale in 0.01..100.0f64,
    ) {
        let mut s = RlsState::<3>::new(SVector::zeros(), scale);
        let mut trace = s.weight.trace();
        for (phi, y) in rows {
            s = s.step(&SVector::from(phi), y).0;
            prop_assert!((s.weight - s.weight.transpose()).abs().max() == 0.0);
            prop_assert!(min_eigenvalue(&s.weight) > -1e-9 * scale);
            prop_assert!(s.weight.trace() <= trace * (1.0 + 1e-12));
            trace = s.weight.trace();
        }
    }

    #[test]
    fn ekf_covariance_stays_symmetric_and_shrinks(
        p in params(),
        rows in prop::collection::vec((100.0..1000.0f64, -5.0..35.0f64, 0.0..=1.0f64, 0.0..900.0f64), 1..40),
    ) {
        let mut s = EkfN5::new(p.to_vector(), 0.01, 1e4);
        for (k, (i0, t, n, y)) in rows.into_iter().enumerate() {
            let trace = s.covariance.trace();
            s = s.step(&regressor(i0, t, n), y, k).unwrap().0;
            prop_assert!((s.covariance - s.covariance.transpose()).abs().max() == 0.0);
            prop_assert!(min_eigenvalue(&s.covariance) > -1e-12);
            prop_assert!(s.covariance.trace() <= trace * (1.0 + 1e-12));
        }
    }

    #[test]
    fn merge_ignores_input_order(
        (power, shuffled_power) in power_records().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
        (cci, shuffled_cci) in cci_records().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let (a, ra) = merge_hourly(&power, &cci);
        let (b, rb) = merge_hourly(&shuffled_power, &shuffled_cci);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&ra, &rb);
        prop_assert!(ra.is_consistent());
        prop_assert!(a.samples.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        prop_assert!(a.samples.iter().all(|s| (0.0..=1.0).contains(&s.cloud)));
    }

    #[test]
    fn merge_is_idempotent(power in power_records(), cci in cci_records()) {
        let (a, _) = merge_hourly(&power, &cci);
        let p2: Vec<PowerRecord> = a.samples.iter().map(|s| PowerRecord {
            timestamp: s.timestamp, power: s.power, temperature: s.temperature,
        }).collect();
        let c2: Vec<CciRecord> = a.samples.iter().map(|s| CciRecord { timestamp: s.timestamp, cci: s.cloud }).collect();
        let (b, report) = merge_hourly(&p2, &c2);
        prop_assert_eq!(a, b);
        prop_assert_eq!(report.hours_dropped, 0);
    }
}
