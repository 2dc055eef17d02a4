//! Small floating-point helpers shared by the closed forms.

/// `expm1(z) / z`, continuous through `z = 0`.
pub(crate) fn exprel(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + z * (0.5 + z / 6.0)
    } else {
        z.exp_m1() / z
    }
}

/// `1 - exp(-x)` without cancellation for small `x`.
#[inline]
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Whether two rates are close enough that the equal-rate limit is used.
#[inline]
pub(crate) fn rates_coincide(a: f64, b: f64) -> bool {
    (a - b).abs() <= crate::channel::EQUAL_RATE_REL_TOL * a.max(b)
}

/// `∫_lo^hi exp(-a·s - b·(m - s)) ds` evaluated without overflow or
/// cancellation.
///
/// The exponent is linear in `s` with slope `b - a`, so the integral equals
/// `exp(E_max) · w · exprel(-|b - a| w)` where `E_max` is the larger endpoint
/// exponent and `w = hi - lo`. Rates within the equal-rate tolerance are
/// replaced by their mean and the slope is taken as zero.
pub(crate) fn exp_ramp_integral(a: f64, b: f64, m: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return 0.0;
    }
    let (a, b) = if rates_coincide(a, b) {
        let mean = 0.5 * (a + b);
        (mean, mean)
    } else {
        (a, b)
    };
    let e_lo = -a * lo - b * (m - lo);
    let e_hi = -a * hi - b * (m - hi);
    e_lo.max(e_hi).exp() * w * exprel(-(b - a).abs() * w)
}

#[inline]
pub(crate) fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}
