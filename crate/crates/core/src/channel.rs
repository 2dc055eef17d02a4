//! Rayleigh block-fading links between source, relay antennas and destination.
//!
//! Every link envelope is Rayleigh, so each squared gain `|h_ij|^2` is
//! exponential with mean `Ω_ij` and rate `λ_ij = 1/Ω_ij`. Links are indexed as
//! in the relay geometry: `11` source to antenna 1, `12` source to antenna 2,
//! `21` antenna 1 to destination, `22` antenna 2 to destination.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{exp_ramp_integral, one_minus_exp_neg, rates_coincide};

/// Relative rate difference below which sum-of-gains expressions switch to
/// their equal-rate (Erlang) limit.
pub const EQUAL_RATE_REL_TOL: f64 = 1e-6;

/// Mean squared gains of the four links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub omega_11: f64,
    pub omega_12: f64,
    pub omega_21: f64,
    pub omega_22: f64,
}

impl ChannelParams {
    pub fn new(omega_11: f64, omega_12: f64, omega_21: f64, omega_22: f64) -> Result<Self> {
        let params = Self {
            omega_11,
            omega_12,
            omega_21,
            omega_22,
        };
        params.validate()?;
        Ok(params)
    }

    /// All four links with the same mean gain.
    pub fn uniform(omega: f64) -> Result<Self> {
        Self::new(omega, omega, omega, omega)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_11", self.omega_11),
            ("omega_12", self.omega_12),
            ("omega_21", self.omega_21),
            ("omega_22", self.omega_22),
        ];
        for (field, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig {
                    field,
                    value,
                    expected: "mean channel gain must be positive and finite",
                });
            }
        }
        Ok(())
    }

    pub fn lambda_11(&self) -> f64 {
        1.0 / self.omega_11
    }

    pub fn lambda_12(&self) -> f64 {
        1.0 / self.omega_12
    }

    pub fn lambda_21(&self) -> f64 {
        1.0 / self.omega_21
    }

    pub fn lambda_22(&self) -> f64 {
        1.0 / self.omega_22
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.omega_11, self.omega_12, self.omega_21, self.omega_22]
    }
}

/// One block-fading realization of the four squared gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSample {
    pub g11: f64,
    pub g12: f64,
    pub g21: f64,
    pub g22: f64,
}

impl GainSample {
    pub fn new(g11: f64, g12: f64, g21: f64, g22: f64) -> Self {
        debug_assert!(
            [g11, g12, g21, g22]
                .iter()
                .all(|g| g.is_finite() && *g >= 0.0),
            "gains must be nonnegative and finite"
        );
        Self { g11, g12, g21, g22 }
    }
}

fn check_rate(name: &'static str, lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: lambda,
            expected: "rate must be positive and finite",
        })
    }
}

fn check_gain(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "x",
            value: x,
            expected: "gain must be nonnegative",
        })
    }
}

/// Density `λ e^{-λx}` of an exponential squared gain.
pub fn gain_pdf(lambda: f64, x: f64) -> Result<f64> {
    check_rate("lambda", lambda)?;
    check_gain(x)?;
    Ok(lambda * (-lambda * x).exp())
}

/// CDF `1 - e^{-λx}`; `x = +∞` gives 1.
pub fn gain_cdf(lambda: f64, x: f64) -> Result<f64> {
    check_rate("lambda", lambda)?;
    check_gain(x)?;
    Ok(exp_cdf(lambda, x))
}

/// CDF of `X + Y` for independent exponentials with rates `lambda_a` and
/// `lambda_b` (hypoexponential, or Erlang-2 when the rates coincide).
pub fn sum_gain_cdf(lambda_a: f64, lambda_b: f64, x: f64) -> Result<f64> {
    check_rate("lambda_a", lambda_a)?;
    check_rate("lambda_b", lambda_b)?;
    check_gain(x)?;
    Ok(sum_exp_cdf(lambda_a, lambda_b, x))
}

#[inline]
pub(crate) fn exp_cdf(lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        one_minus_exp_neg(lambda * x)
    }
}

/// Unchecked sum-of-exponentials CDF.
///
/// Written as `P(X ≤ x) - ∫_0^x λ_a e^{-λ_a s} e^{-λ_b (x - s)} ds` with the
/// slower rate first, which makes the result exactly symmetric in its rate
/// arguments and free of the `1/(λ_b - λ_a)` cancellation.
pub(crate) fn sum_exp_cdf(lambda_a: f64, lambda_b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (a, b) = if lambda_a <= lambda_b {
        (lambda_a, lambda_b)
    } else {
        (lambda_b, lambda_a)
    };
    if rates_coincide(a, b) {
        let t = 0.5 * (a + b) * x;
        return crate::math::clamp_probability(one_minus_exp_neg(t) - t * (-t).exp());
    }
    let head = one_minus_exp_neg(a * x);
    crate::math::clamp_probability(head - a * exp_ramp_integral(a, b, x, 0.0, x))
}

/// Draws one realization by inverse-CDF sampling, one uniform per link, in
/// the order `g11, g12, g21, g22`.
pub fn sample_gains<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> GainSample {
    let mut draw = |omega: f64| -> f64 {
        let u: f64 = rng.random();
        -omega * (-u).ln_1p()
    };
    let g11 = draw(params.omega_11);
    let g12 = draw(params.omega_12);
    let g21 = draw(params.omega_21);
    let g22 = draw(params.omega_22);
    GainSample { g11, g12, g21, g22 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Composite Simpson on the convolution `∫_0^x f_a(s) F_b(x - s) ds`.
    fn convolution_oracle(a: f64, b: f64, x: f64) -> f64 {
        let n = 200_000;
        let h = x / n as f64;
        let f = |s: f64| a * (-a * s).exp() * (1.0 - (-b * (x - s)).exp());
        let mut acc = f(0.0) + f(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn pdf_values() {
        assert_eq!(gain_pdf(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(gain_pdf(2.0, 0.0).unwrap(), 2.0);
        assert_relative_eq!(
            gain_pdf(1.0, 1.0).unwrap(),
            0.36787944117144233,
            epsilon = 1e-15
        );
    }

    #[test]
    fn cdf_values() {
        assert_eq!(gain_cdf(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(gain_cdf(1.0, f64::INFINITY).unwrap(), 1.0);
        assert_relative_eq!(
            gain_cdf(1.0, 1.0).unwrap(),
            0.6321205588285577,
            epsilon = 1e-15
        );
    }

    #[test]
    fn domain_errors() {
        assert!(gain_pdf(0.0, 1.0).is_err());
        assert!(gain_pdf(-1.0, 1.0).is_err());
        assert!(gain_pdf(1.0, -0.1).is_err());
        assert!(gain_cdf(0.0, 1.0).is_err());
        assert!(gain_cdf(1.0, -1.0).is_err());
        assert!(sum_gain_cdf(1.0, 0.0, 1.0).is_err());
        assert!(sum_gain_cdf(-2.0, 1.0, 1.0).is_err());
        assert!(sum_gain_cdf(1.0, 1.0, -1e-9).is_err());
        assert!(ChannelParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn sum_cdf_values() {
        assert_eq!(sum_gain_cdf(1.0, 1.0, 0.0).unwrap(), 0.0);
        // Erlang-2: 1 - 4e^{-3}
        let erlang = 1.0 - 4.0 * (-3.0f64).exp();
        assert_relative_eq!(erlang, 0.8008517265285442, epsilon = 1e-15);
        assert_relative_eq!(
            sum_gain_cdf(1.0, 1.0, 3.0).unwrap(),
            erlang,
            epsilon = 1e-15
        );
        let oracle = convolution_oracle(1.0, 2.0, 1.0);
        assert_relative_eq!(oracle, 0.3995764008937279, epsilon = 1e-12);
        assert_relative_eq!(
            sum_gain_cdf(1.0, 2.0, 1.0).unwrap(),
            oracle,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sum_cdf_matches_convolution_on_grid() {
        for &(a, b) in &[
            (1.0f64, 2.0f64),
            (0.1, 10.0),
            (3.0, 3.0),
            (0.5, 0.5000001),
            (7.0, 0.2),
        ] {
            for k in 1..=50 {
                let x = k as f64 * 0.4 / a.min(b);
                let expected = convolution_oracle(a, b, x);
                let got = sum_exp_cdf(a, b, x);
                assert!(
                    (got - expected).abs() < 1e-9,
                    "a={a} b={b} x={x}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn equal_rate_switch_is_continuous() {
        // Against the Erlang-2 law at the mean rate, which is where the branch lands.
        for &lambda in &[0.1, 1.0, 10.0] {
            // just outside the switch, so the hypoexponential branch runs
            let other = lambda * (1.0 + 1.01 * EQUAL_RATE_REL_TOL);
            assert!(!rates_coincide(lambda, other));
            let mean = 0.5 * (lambda + other);
            for k in 0..=200 {
                let x = k as f64 * 0.1 / lambda;
                let erlang = 1.0 - (-mean * x).exp() * (1.0 + mean * x);
                let hypo = sum_exp_cdf(lambda, other, x);
                assert!((hypo - erlang).abs() <= 1e-8, "λ={lambda} x={x}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = ChannelParams::uniform(1.0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let a = sample_gains(&params, &mut r1);
            let b = sample_gains(&params, &mut r2);
            assert_eq!(a.g11.to_bits(), b.g11.to_bits());
            assert_eq!(a.g22.to_bits(), b.g22.to_bits());
        }
    }

    #[test]
    fn sample_mean_and_cdf() {
        let params = ChannelParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut below = 0u64;
        for _ in 0..n {
            let s = sample_gains(&params, &mut rng);
            sum += s.g11;
            if s.g12 <= 1.0 {
                below += 1;
            }
        }
        let mean = sum / n as f64;
        assert!((mean - 2.0).abs() < 3.0 * 2.0 / 1000.0, "mean {mean}");
        let p = below as f64 / n as f64;
        assert!((p - 0.6321).abs() < 0.0015, "p {p}");
    }

    #[test]
    fn empirical_cdf_passes_ks() {
        let params = ChannelParams::uniform(1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n)
            .map(|_| sample_gains(&params, &mut rng).g21)
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lambda = params.lambda_21();
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = exp_cdf(lambda, x);
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "D = {d}, critical {critical}");
    }

    proptest! {
        #[test]
        fn cdf_is_a_monotone_probability(lambda in 1e-3f64..1e3, x in 0f64..1e3, dx in 0f64..10.0) {
            let f0 = gain_cdf(lambda, x).unwrap();
            let f1 = gain_cdf(lambda, x + dx).unwrap();
            prop_assert!((0.0..=1.0).contains(&f0));
            prop_assert!(f1 >= f0);
        }

        #[test]
        fn sum_cdf_is_symmetric(a in 1e-2f64..1e2, b in 1e-2f64..1e2, x in 0f64..100.0) {
            prop_assert_eq!(sum_gain_cdf(a, b, x).unwrap(), sum_gain_cdf(b, a, x).unwrap());
        }

        #[test]
        fn sum_cdf_bounded_by_marginals(a in 1e-2f64..1e2, b in 1e-2f64..1e2, x in 0f64..100.0) {
            let s = sum_exp_cdf(a, b, x);
            prop_assert!(s <= exp_cdf(a, x) + 1e-15);
            prop_assert!(s <= exp_cdf(b, x) + 1e-15);
            prop_assert!(s >= 0.0);
        }
    }
}
