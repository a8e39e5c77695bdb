//! PVUSA plant model combined with a quadratic cloud cover factor, in
//! regression form `P = φ(I⁰, T, N)ᵀ θ(μ)`.
//!
//! Units: irradiance in W/m², temperature in °C, power in kW.
//!
//! Parameter vector layout (`μ`):
//!
//! | index | field                | role                                    |
//! |-------|----------------------|-----------------------------------------|
//! | 0     | `gain`               | power/irradiance gain                   |
//! | 1     | `irradiance_sq`      | irradiance² coefficient                 |
//! | 2     | `irradiance_temp`    | irradiance × temperature coefficient    |
//! | 3     | `cloud_linear`       | linear cloud cover factor coefficient   |
//! | 4     | `cloud_quadratic`    | quadratic cloud cover factor coefficient|
//! | 5     | `coupled` (N6 only)  | free surrogate of `irradiance_sq * cloud_linear` |

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

pub const THETA_LEN: usize = 11;

/// Regression image of the physical parameters, ordered as the monomials of
/// [`regressor`].
pub type ThetaVector = SVector<f64, THETA_LEN>;

/// `[I⁰, I⁰N, I⁰N², I⁰², I⁰²N, I⁰²N², I⁰²N³, I⁰²N⁴, TI⁰, TI⁰N, TI⁰N²]`
pub type Regressor = SVector<f64, THETA_LEN>;

/// Typical range of `irradiance_sq / gain` across PV technologies.
pub const ETA2_RANGE: (f64, f64) = (-2.5e-4, -1.9e-5);
/// Typical range of `irradiance_temp / gain` across PV technologies.
pub const ETA3_RANGE: (f64, f64) = (-4.8e-3, -1.7e-3);

/// One weather report: cloud cover fraction and air temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSample {
    pub cloud: f64,
    pub temperature: f64,
}

impl WeatherSample {
    pub fn new(cloud: f64, temperature: f64) -> Result<Self> {
        check_cloud(cloud)?;
        Ok(Self { cloud, temperature })
    }
}

fn check_cloud(n: f64) -> Result<()> {
    if (0.0..=1.0).contains(&n) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "cloud cover",
            value: n,
            expected: "[0, 1]",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsN5 {
    pub gain: f64,
    pub irradiance_sq: f64,
    pub irradiance_temp: f64,
    pub cloud_linear: f64,
    pub cloud_quadratic: f64,
}

impl ParamsN5 {
    pub fn to_vector(&self) -> SVector<f64, 5> {
        SVector::from([
            self.gain,
            self.irradiance_sq,
            self.irradiance_temp,
            self.cloud_linear,
            self.cloud_quadratic,
        ])
    }

    pub fn from_vector(v: &SVector<f64, 5>) -> Self {
        Self {
            gain: v[0],
            irradiance_sq: v[1],
            irradiance_temp: v[2],
            cloud_linear: v[3],
            cloud_quadratic: v[4],
        }
    }

    /// `irradiance_sq / gain`; expected in [`ETA2_RANGE`].
    pub fn eta2(&self) -> f64 {
        self.irradiance_sq / self.gain
    }

    /// `irradiance_temp / gain`; expected in [`ETA3_RANGE`].
    pub fn eta3(&self) -> f64 {
        self.irradiance_temp / self.gain
    }

    pub fn is_physically_consistent(&self) -> bool {
        in_range(self.eta2(), ETA2_RANGE) && in_range(self.eta3(), ETA3_RANGE)
    }

    pub fn theta(&self) -> ThetaVector {
        theta_n5(self)
    }

    /// The equivalent N6 parameters (`coupled = irradiance_sq * cloud_linear`).
    pub fn to_n6(&self) -> ParamsN6 {
        ParamsN6 {
            base: *self,
            coupled: self.irradiance_sq * self.cloud_linear,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_vector(&(self.to_vector() * factor))
    }
}

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsN6 {
    pub base: ParamsN5,
    pub coupled: f64,
}

impl ParamsN6 {
    pub fn to_vector(&self) -> SVector<f64, 6> {
        let b = &self.base;
        SVector::from([
            b.gain,
            b.irradiance_sq,
            b.irradiance_temp,
            b.cloud_linear,
            b.cloud_quadratic,
            self.coupled,
        ])
    }

    pub fn from_vector(v: &SVector<f64, 6>) -> Self {
        Self {
            base: ParamsN5::from_vector(&v.fixed_rows::<5>(0).into_owned()),
            coupled: v[5],
        }
    }

    /// `|coupled - irradiance_sq * cloud_linear|`; zero for a model that is
    /// exactly representable in N5.
    pub fn coupling_gap(&self) -> f64 {
        (self.coupled - self.base.irradiance_sq * self.base.cloud_linear).abs()
    }

    pub fn theta(&self) -> ThetaVector {
        theta_n6(self)
    }
}

/// Cloud cover factor `1 + μ4 N + μ5 N²`. Not clamped: values above 1 occur
/// for thin cloud in some climates.
pub fn ccf(n: f64, cloud_linear: f64, cloud_quadratic: f64) -> Result<f64> {
    check_cloud(n)?;
    Ok(1.0 + cloud_linear * n + cloud_quadratic * n * n)
}

/// PVUSA power `μ1 I + μ2 I² + μ3 I T`.
pub fn pvusa_power(irradiance: f64, temperature: f64, gain: f64, irr_sq: f64, irr_temp: f64) -> f64 {
    gain * irradiance + irr_sq * irradiance * irradiance + irr_temp * irradiance * temperature
}

pub fn effective_irradiance(clear_sky: f64, n: f64, cloud_linear: f64, cloud_quadratic: f64) -> Result<f64> {
    Ok(ccf(n, cloud_linear, cloud_quadratic)? * clear_sky)
}

/// Generated power from clear-sky irradiance, temperature and cloud cover,
/// evaluated in the physical (non-regression) form.
pub fn combined_power(clear_sky: f64, temperature: f64, n: f64, p: &ParamsN5) -> Result<f64> {
    let irradiance = effective_irradiance(clear_sky, n, p.cloud_linear, p.cloud_quadratic)?;
    Ok(pvusa_power(
        irradiance,
        temperature,
        p.gain,
        p.irradiance_sq,
        p.irradiance_temp,
    ))
}

pub fn regressor(clear_sky: f64, temperature: f64, n: f64) -> Regressor {
    let i = clear_sky;
    let i2 = i * i;
    let n2 = n * n;
    let t = temperature * i;
    Regressor::from([
        i,
        i * n,
        i * n2,
        i2,
        i2 * n,
        i2 * n2,
        i2 * n2 * n,
        i2 * n2 * n2,
        t,
        t * n,
        t * n2,
    ])
}

pub fn theta_n5(p: &ParamsN5) -> ThetaVector {
    let (m1, m2, m3, m4, m5) = (
        p.gain,
        p.irradiance_sq,
        p.irradiance_temp,
        p.cloud_linear,
        p.cloud_quadratic,
    );
    ThetaVector::from([
        m1,
        m1 * m4,
        m1 * m5,
        m2,
        2.0 * m2 * m4,
        m2 * m4 * m4 + 2.0 * m2 * m5,
        2.0 * m2 * m4 * m5,
        m2 * m5 * m5,
        m3,
        m3 * m4,
        m3 * m5,
    ])
}

pub fn theta_n6(p: &ParamsN6) -> ThetaVector {
    let b = &p.base;
    let (m1, m2, m3, m4, m5, m6) = (
        b.gain,
        b.irradiance_sq,
        b.irradiance_temp,
        b.cloud_linear,
        b.cloud_quadratic,
        p.coupled,
    );
    ThetaVector::from([
        m1,
        m1 * m4,
        m1 * m5,
        m2,
        2.0 * m6,
        m4 * m6 + 2.0 * m2 * m5,
        2.0 * m5 * m6,
        m2 * m5 * m5,
        m3,
        m3 * m4,
        m3 * m5,
    ])
}

/// A nonlinear map from a `P`-dimensional parameter vector to `θ`.
pub trait Parameterization<const P: usize>: Clone + Copy + std::fmt::Debug + Send + Sync {
    const NAME: &'static str;

    fn theta(mu: &SVector<f64, P>) -> ThetaVector;

    /// `∂θ/∂μ`, 11 × P.
    fn jacobian(mu: &SVector<f64, P>) -> SMatrix<f64, THETA_LEN, P>;

    fn parameter_names() -> [&'static str; P];
}

/// Minimal five-parameter model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct N5;

/// Six-parameter model treating `μ2 μ4` as a free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct N6;

impl Parameterization<5> for N5 {
    const NAME: &'static str = "N5";

    fn theta(mu: &SVector<f64, 5>) -> ThetaVector {
        theta_n5(&ParamsN5::from_vector(mu))
    }

    fn jacobian(mu: &SVector<f64, 5>) -> SMatrix<f64, THETA_LEN, 5> {
        jacobian_n5(&ParamsN5::from_vector(mu))
    }

    fn parameter_names() -> [&'static str; 5] {
        ["mu1", "mu2", "mu3", "mu4", "mu5"]
    }
}

impl Parameterization<6> for N6 {
    const NAME: &'static str = "N6";

    fn theta(mu: &SVector<f64, 6>) -> ThetaVector {
        theta_n6(&ParamsN6::from_vector(mu))
    }

    fn jacobian(mu: &SVector<f64, 6>) -> SMatrix<f64, THETA_LEN, 6> {
        jacobian_n6(&ParamsN6::from_vector(mu))
    }

    fn parameter_names() -> [&'static str; 6] {
        ["mu1", "mu2", "mu3", "mu4", "mu5", "mu6"]
    }
}

pub fn jacobian_n5(p: &ParamsN5) -> SMatrix<f64, THETA_LEN, 5> {
    let (m1, m2, m3, m4, m5) = (
        p.gain,
        p.irradiance_sq,
        p.irradiance_temp,
        p.cloud_linear,
        p.cloud_quadratic,
    );
    let mut j = SMatrix::<f64, THETA_LEN, 5>::zeros();
    // d/dμ1
    j[(0, 0)] = 1.0;
    j[(1, 0)] = m4;
    j[(2, 0)] = m5;
    // d/dμ2
    j[(3, 1)] = 1.0;
    j[(4, 1)] = 2.0 * m4;
    j[(5, 1)] = m4 * m4 + 2.0 * m5;
    j[(6, 1)] = 2.0 * m4 * m5;
    j[(7, 1)] = m5 * m5;
    // d/dμ3
    j[(8, 2)] = 1.0;
    j[(9, 2)] = m4;
    j[(10, 2)] = m5;
    // d/dμ4
    j[(1, 3)] = m1;
    j[(4, 3)] = 2.0 * m2;
    j[(5, 3)] = 2.0 * m2 * m4;
    j[(6, 3)] = 2.0 * m2 * m5;
    j[(9, 3)] = m3;
    // d/dμ5
    j[(2, 4)] = m1;
    j[(5, 4)] = 2.0 * m2;
    j[(6, 4)] = 2.0 * m2 * m4;
    j[(7, 4)] = 2.0 * m2 * m5;
    j[(10, 4)] = m3;
    j
}

pub fn jacobian_n6(p: &ParamsN6) -> SMatrix<f64, THETA_LEN, 6> {
    let b = &p.base;
    let (m1, m2, m3, m4, m5, m6) = (
        b.gain,
        b.irradiance_sq,
        b.irradiance_temp,
        b.cloud_linear,
        b.cloud_quadratic,
        p.coupled,
    );
    let mut j = SMatrix::<f64, THETA_LEN, 6>::zeros();
    j[(0, 0)] = 1.0;
    j[(1, 0)] = m4;
    j[(2, 0)] = m5;

    j[(3, 1)] = 1.0;
    j[(5, 1)] = 2.0 * m5;
    j[(7, 1)] = m5 * m5;

    j[(8, 2)] = 1.0;
    j[(9, 2)] = m4;
    j[(10, 2)] = m5;

    j[(1, 3)] = m1;
    j[(5, 3)] = m6;
    j[(9, 3)] = m3;

    j[(2, 4)] = m1;
    j[(5, 4)] = 2.0 * m2;
    j[(6, 4)] = 2.0 * m6;
    j[(7, 4)] = 2.0 * m2 * m5;
    j[(10, 4)] = m3;

    j[(4, 5)] = 2.0;
    j[(5, 5)] = m4;
    j[(6, 5)] = 2.0 * m5;
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn truth() -> ParamsN5 {
        ParamsN5 {
            gain: 0.92,
            irradiance_sq: -1.237e-4,
            irradiance_temp: -2.99e-3,
            cloud_linear: -0.3,
            cloud_quadratic: -0.25,
        }
    }

    #[test]
    fn ccf_values() {
        assert_eq!(ccf(0.0, -0.3, -0.25).unwrap(), 1.0);
        assert_relative_eq!(ccf(1.0, -0.3, -0.25).unwrap(), 0.45, epsilon = 1e-15);
        assert!(ccf(0.1, 0.784, -1.344).unwrap() > 1.0);
        assert!(ccf(1.2, 0.0, 0.0).is_err());
        assert!(ccf(-0.01, 0.0, 0.0).is_err());
    }

    #[test]
    fn pvusa_values() {
        let p = truth();
        assert_eq!(
            pvusa_power(0.0, 25.0, p.gain, p.irradiance_sq, p.irradiance_temp),
            0.0
        );
        let v = pvusa_power(1000.0, 25.0, p.gain, p.irradiance_sq, p.irradiance_temp);
        assert_relative_eq!(v, 721.55, epsilon = 1e-9);
        let alt = p.gain * (1.0 + p.eta2() * 1000.0 + p.eta3() * 25.0) * 1000.0;
        assert_relative_eq!(v, alt, max_relative = 1e-14);
    }

    #[test]
    fn effective_and_combined() {
        let p = truth();
        assert_relative_eq!(
            effective_irradiance(800.0, 0.5, p.cloud_linear, p.cloud_quadratic).unwrap(),
            630.0,
            epsilon = 1e-12
        );
        assert_eq!(effective_irradiance(0.0, 0.7, -0.3, -0.25).unwrap(), 0.0);
        assert_eq!(effective_irradiance(500.0, 0.0, -0.3, -0.25).unwrap(), 500.0);
        let expected = 0.92 * 630.0 - 1.237e-4 * 630.0 * 630.0 - 2.99e-3 * 630.0 * 20.0;
        assert_relative_eq!(
            combined_power(800.0, 20.0, 0.5, &p).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_eq!(combined_power(0.0, 30.0, 0.3, &p).unwrap(), 0.0);
    }

    #[test]
    fn regressor_values() {
        let e = regressor(1.0, 0.0, 0.0);
        assert_eq!(
            e.as_slice(),
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert!(regressor(0.0, 12.0, 0.4).iter().all(|&x| x == 0.0));
        let r = regressor(2.0, 3.0, 0.5);
        assert_eq!(
            r.as_slice(),
            &[2.0, 1.0, 0.5, 4.0, 2.0, 1.0, 0.5, 0.25, 6.0, 3.0, 1.5]
        );
    }

    #[test]
    fn theta_unit_and_truth() {
        let unit = ParamsN5 {
            gain: 1.0,
            irradiance_sq: 0.0,
            irradiance_temp: 0.0,
            cloud_linear: 0.0,
            cloud_quadratic: 0.0,
        };
        let mut e1 = ThetaVector::zeros();
        e1[0] = 1.0;
        assert_eq!(theta_n5(&unit), e1);

        // hand expansion with μ = (0.92, -1.237e-4, -2.99e-3, -0.3, -0.25)
        let expected = [
            0.92,
            -0.276,
            -0.23,
            -1.237e-4,
            7.422e-5,
            5.0717e-5,
            -1.8555e-5,
            -7.73125e-6,
            -2.99e-3,
            8.97e-4,
            7.475e-4,
        ];
        for (a, b) in theta_n5(&truth()).iter().zip(expected) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn n6_matches_n5_when_coupled() {
        let p = truth();
        assert_eq!(theta_n6(&p.to_n6()), theta_n5(&p));
        assert_eq!(p.to_n6().coupling_gap(), 0.0);
    }

    #[test]
    fn jacobian_spot_entries() {
        let j5 = jacobian_n5(&truth());
        assert_eq!(j5[(0, 0)], 1.0);
        assert_eq!(j5[(0, 3)], 0.0);
        let j6 = jacobian_n6(&truth().to_n6());
        assert_eq!(j6[(4, 5)], 2.0);
        assert_eq!(j6[(4, 1)], 0.0);
    }

    fn central_difference<const P: usize, M: Parameterization<P>>(
        mu: &SVector<f64, P>,
    ) -> SMatrix<f64, THETA_LEN, P> {
        let mut out = SMatrix::<f64, THETA_LEN, P>::zeros();
        for c in 0..P {
            let h = f64::EPSILON.cbrt() * mu[c].abs().max(1.0);
            let mut up = *mu;
            let mut down = *mu;
            up[c] += h;
            down[c] -= h;
            let col = (M::theta(&up) - M::theta(&down)) / (2.0 * h);
            out.set_column(c, &col);
        }
        out
    }

    fn assert_jacobian_close<const P: usize>(a: &SMatrix<f64, THETA_LEN, P>, b: &SMatrix<f64, THETA_LEN, P>) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-6 * y.abs().max(1e-6), "{x} vs {y}");
        }
    }

    #[test]
    fn jacobians_match_finite_differences_at_truth() {
        let mu5 = truth().to_vector();
        assert_jacobian_close(&N5::jacobian(&mu5), &central_difference::<5, N5>(&mu5));
        let mut mu6 = truth().to_n6().to_vector();
        mu6[5] *= 1.3;
        assert_jacobian_close(&N6::jacobian(&mu6), &central_difference::<6, N6>(&mu6));
    }

    fn params_strategy() -> impl Strategy<Value = ParamsN5> {
        (
            0.1f64..2.0,
            -3e-4f64..0.0,
            -6e-3f64..0.0,
            -1.0f64..1.0,
            -1.5f64..0.5,
        )
            .prop_map(|(a, b, c, d, e)| ParamsN5 {
                gain: a,
                irradiance_sq: b,
                irradiance_temp: c,
                cloud_linear: d,
                cloud_quadratic: e,
            })
    }

    proptest! {
        #[test]
        fn regression_form_matches_physical_form(
            p in params_strategy(),
            i0 in 0.0f64..1100.0,
            t in -10.0f64..45.0,
            n in 0.0f64..=1.0,
        ) {
            let direct = combined_power(i0, t, n, &p).unwrap();
            let reg = regressor(i0, t, n).dot(&theta_n5(&p));
            prop_assert!((reg - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
            let reg6 = regressor(i0, t, n).dot(&theta_n6(&p.to_n6()));
            prop_assert!((reg6 - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
        }

        #[test]
        fn zero_irradiance_gives_zero_power(p in params_strategy(), t in -10.0f64..45.0, n in 0.0f64..=1.0) {
            prop_assert_eq!(combined_power(0.0, t, n, &p).unwrap(), 0.0);
        }
    }
}
