//! Globally adaptive 15-point Gauss-Kronrod quadrature and the numerical
//! evaluation of the conditional HD hop outages.

use std::collections::BinaryHeap;

use crate::analytic::{EventTag, DEGENERATE_CONDITIONING};
use crate::channel::gain_cdf;
use crate::error::{Error, Result};
use crate::modes::{compute_thresholds, SystemConfig};

// Kronrod abscissae (descending) and weights; odd entries are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_163_867_775,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Subdivision budget for [`integrate`].
pub const MAX_INTERVALS: usize = 4000;

/// Absolute tolerance used by [`quad_conditional`].
pub const CONDITIONAL_ABS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[lo, hi]`, split first at `breaks`, bisecting the
/// panel with the largest error until the summed error estimate drops
/// below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<Integral> {
    if hi <= lo {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            intervals: 0,
        });
    }
    let mut edges = vec![lo];
    edges.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap: BinaryHeap<Panel> = edges
        .windows(2)
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureNotConverged {
                intervals: heap.len(),
                error_estimate: error,
            });
        }
        if error <= abs_tol {
            return Ok(Integral {
                value,
                error_estimate: error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNotConverged {
                intervals: heap.len(),
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel cannot be split further in floating point.
            return Err(Error::QuadratureNotConverged {
                intervals: heap.len() + 1,
                error_estimate: error,
            });
        }
        heap.push(gauss_kronrod(&f, worst.lo, mid));
        heap.push(gauss_kronrod(&f, mid, worst.hi));
    }
}

/// Which HD hop a conditional refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hop {
    /// Source to relay, on `g11 + g12`.
    SourceRelay,
    /// Relay to destination, on `g21 + g22`.
    RelayDestination,
}

impl Hop {
    pub const ALL: [Hop; 2] = [Hop::SourceRelay, Hop::RelayDestination];

    pub fn name(self) -> &'static str {
        match self {
            Hop::SourceRelay => "sr",
            Hop::RelayDestination => "rd",
        }
    }
}

/// `P(X + Y < m | X ∈ conditioning set)` by one-dimensional quadrature.
///
/// The inner integral over `Y` is its exponential CDF. The outer variable is
/// mapped through its own truncated CDF, `v = F_trunc(x)`, so the integrand
/// becomes `F_Y(m - x(v))` on `v ∈ [0, V]`, bounded and free of endpoint
/// peaks; `V` is then normalized onto `[0, 1]`.
fn conditional_by_quadrature(a: f64, b: f64, m: f64, cut: f64, below: bool) -> Result<f64> {
    if m <= 0.0 {
        return Ok(0.0);
    }
    let free_cdf = |y: f64| {
        if y <= 0.0 {
            0.0
        } else {
            gain_cdf(b, y).unwrap_or(0.0)
        }
    };

    let (origin, mass, span) = if below {
        let mass = gain_cdf(a, cut)?;
        if mass.is_nan() || mass <= DEGENERATE_CONDITIONING {
            // Degenerate: unconditioned hop outage, same convention as the closed form.
            return conditional_by_quadrature(a, b, m, 0.0, false);
        }
        let upper = cut.min(m);
        (0.0, mass, gain_cdf(a, upper)?)
    } else {
        if cut >= m {
            return Ok(0.0);
        }
        (cut, 1.0, gain_cdf(a, m - cut)?)
    };
    if span <= 0.0 {
        return Ok(0.0);
    }
    // x(v) = origin - ln(1 - v)/a, with v = span · s
    let integrand = |s: f64| {
        let x = origin - (-span * s).ln_1p() / a;
        free_cdf(m - x)
    };
    // Break where the free CDF bends: y = m - x at 1/b and 10/b.
    let mut breaks = Vec::new();
    for k in [1.0, 10.0] {
        let x = m - k / b;
        if x > origin {
            let v = gain_cdf(a, x - origin)?;
            breaks.push(v / span);
        }
    }
    breaks.extend((1..8).map(|i| i as f64 / 8.0));
    let scale = span / mass;
    let tol = CONDITIONAL_ABS_TOL / scale.max(f64::MIN_POSITIVE);
    let integral = integrate(integrand, 0.0, 1.0, &breaks, tol.min(1.0))?;
    Ok((integral.value * scale).clamp(0.0, 1.0))
}

/// Numerical conditional HD outage of one hop given an FD-failure event.
pub fn quad_conditional(tag: EventTag, hop: Hop, config: &SystemConfig) -> Result<f64> {
    let t = compute_thresholds(config);
    let ch = &config.channel;
    let (src_out, rel_out) = tag.hop_outages();
    match hop {
        Hop::SourceRelay => {
            conditional_by_quadrature(ch.lambda_11(), ch.lambda_12(), t.m2, t.m1, src_out)
        }
        Hop::RelayDestination => {
            conditional_by_quadrature(ch.lambda_22(), ch.lambda_21(), t.m2p, t.m3, rel_out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_known_functions() {
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, &[], 1e-13).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-13);
        let r = integrate(f64::exp, 0.0, 1.0, &[], 1e-13).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::E - 1.0, epsilon = 1e-13);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &[], 1e-12).unwrap();
        assert_relative_eq!(r.value, 2.0 / 3.0, epsilon = 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let err = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &[], 1e-12).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(
            integrate(f64::exp, 1.0, 1.0, &[], 1e-10).unwrap().value,
            0.0
        );
    }

    fn baseline() -> SystemConfig {
        SystemConfig {
            p_s: 1.0,
            p_r: 1.0,
            sigma2: 1.0,
            k_r: 0.0,
            r0: 1.0,
            channel: ChannelParams::uniform(1.0).unwrap(),
        }
    }

    #[test]
    fn baseline_event_a() {
        let e = std::f64::consts::E;
        let sr = quad_conditional(EventTag::A, Hop::SourceRelay, &baseline()).unwrap();
        let rd = quad_conditional(EventTag::A, Hop::RelayDestination, &baseline()).unwrap();
        assert_relative_eq!(sr, 1.0 - e.powi(-3) / (1.0 - 1.0 / e), epsilon = 1e-10);
        assert_relative_eq!(rd, 1.0 - 3.0 * e.powi(-2), epsilon = 1e-10);
        assert!((sr - 0.9212381).abs() < 1e-7);
        assert!((rd - 0.5939942).abs() < 1e-7);
    }

    #[test]
    fn zero_threshold_is_zero() {
        assert_eq!(
            conditional_by_quadrature(1.0, 2.0, 0.0, 0.5, true).unwrap(),
            0.0
        );
        assert_eq!(
            conditional_by_quadrature(1.0, 2.0, 0.0, 0.5, false).unwrap(),
            0.0
        );
    }
}
