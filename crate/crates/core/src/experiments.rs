//! Parameter sweeps over the proposed scheme, its FD-only and HD-only
//! components, and the single-antenna hybrid baseline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{system_outage, EventTag};
use crate::error::{Error, Result};
use crate::math::{clamp_probability, one_minus_exp_neg};
use crate::modes::{compute_thresholds, SystemConfig};
use crate::oracle::{mc_estimate, Estimate};

/// Hybrid outage when the HD mode uses only antenna 1 for reception and
/// antenna 2 for transmission (no MRC/MRT).
///
/// Both modes then depend on `g11` and `g22` alone, so every conditional HD
/// outage is a truncated single-exponential probability:
/// `P(g ≥ h | g < c)` or `P(g ≥ h | g ≥ c)` per hop.
pub fn traditional_outage(config: &SystemConfig) -> f64 {
    let t = compute_thresholds(config);
    let ch = &config.channel;
    let (l11, l22) = (ch.lambda_11(), ch.lambda_22());

    // P(g ≥ h | g < c)
    let survive_below = |lambda: f64, h: f64, c: f64| -> f64 {
        let mass = one_minus_exp_neg(lambda * c);
        if mass.is_nan() || mass <= crate::analytic::DEGENERATE_CONDITIONING {
            return (-lambda * h).exp();
        }
        if h >= c {
            0.0
        } else {
            clamp_probability((-lambda * h).exp() * one_minus_exp_neg(lambda * (c - h)) / mass)
        }
    };
    // P(g ≥ h | g ≥ c)
    let survive_above = |lambda: f64, h: f64, c: f64| -> f64 {
        if h <= c {
            1.0
        } else {
            (-lambda * (h - c)).exp()
        }
    };

    let src_out = one_minus_exp_neg(l11 * t.m1);
    let rel_out = one_minus_exp_neg(l22 * t.m3);
    let src_ok = (-l11 * t.m1).exp();
    let rel_ok = (-l22 * t.m3).exp();

    let total: f64 = EventTag::ALL
        .iter()
        .map(|&tag| {
            let (s_out, r_out) = tag.hop_outages();
            let p_event =
                (if s_out { src_out } else { src_ok }) * (if r_out { rel_out } else { rel_ok });
            let s_pass = if s_out {
                survive_below(l11, t.m2, t.m1)
            } else {
                survive_above(l11, t.m2, t.m1)
            };
            let r_pass = if r_out {
                survive_below(l22, t.m2p, t.m3)
            } else {
                survive_above(l22, t.m2p, t.m3)
            };
            p_event * clamp_probability(1.0 - s_pass * r_pass)
        })
        .sum();
    clamp_probability(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Hybrid scheme with MRC/MRT in HD mode.
    Proposed,
    /// Hybrid scheme with single-antenna HD mode.
    Traditional,
    FdOnly,
    HdOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::Traditional,
        Scheme::FdOnly,
        Scheme::HdOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Traditional => "traditional",
            Scheme::FdOnly => "fd_only",
            Scheme::HdOnly => "hd_only",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s || x.name().replace('_', "-") == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Relay power in dB relative to the noise variance.
    PrDb,
    /// Source power in dB relative to the noise variance.
    PsDb,
    R0,
    /// RSI variance in dB (10·log10 σ²_RSI), so a uniform grid is log-spaced.
    RsiVar,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PrDb => "pr_db",
            SweepVariable::PsDb => "ps_db",
            SweepVariable::R0 => "r0",
            SweepVariable::RsiVar => "rsi_var_db",
        }
    }
}

/// How the residual self-interference is held while other variables move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RsiModel {
    /// Fixed `k_r`; the RSI variance scales with the relay power.
    Coefficient(f64),
    /// Fixed RSI variance; `k_r` is re-derived as `variance / p_r`.
    Variance(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub base: SystemConfig,
    pub rsi: RsiModel,
    /// Monte Carlo samples per grid point; zero for analytic only.
    pub mc_samples: u64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidSweep(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start <= self.stop) {
            return Err(Error::InvalidSweep(format!(
                "need start <= stop, got {}..{}",
                self.start, self.stop
            )));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidSweep("no schemes selected".into()));
        }
        Ok(())
    }

    /// Grid values `start + i·step` up to `stop` (inclusive, with a small
    /// tolerance for accumulated rounding in `stop`).
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    /// Configuration at one grid value.
    pub fn config_at(&self, value: f64) -> SystemConfig {
        let mut c = self.base;
        let mut rsi = self.rsi;
        match self.variable {
            SweepVariable::PrDb => c.p_r = db_to_linear(value),
            SweepVariable::PsDb => c.p_s = db_to_linear(value),
            SweepVariable::R0 => c.r0 = value,
            SweepVariable::RsiVar => rsi = RsiModel::Variance(db_to_linear(value)),
        }
        match rsi {
            RsiModel::Coefficient(k) => c.k_r = k,
            RsiModel::Variance(v) => c.k_r = v / c.p_r,
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub p_analytic: f64,
    pub mc: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub config: SystemConfig,
    pub results: Vec<SchemeResult>,
    /// Root seed of the sweep; the row's own stream is derived from it and `index`.
    pub seed: u64,
    pub n_samples: u64,
    /// `"ok"` or a description of what failed for this row.
    pub status: String,
}

impl SweepRow {
    pub fn analytic(&self, scheme: Scheme) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.scheme == scheme)
            .map(|r| r.p_analytic)
    }
}

/// Per-row seed: a SplitMix64 step over `(root, index)` so neighbouring rows
/// get unrelated ChaCha keys.
pub fn row_seed(root: u64, index: usize) -> u64 {
    let mut z = root.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn evaluate_row(spec: &SweepSpec, index: usize, value: f64) -> SweepRow {
    let config = spec.config_at(value);
    let mut row = SweepRow {
        index,
        value,
        config,
        results: Vec::new(),
        seed: spec.seed,
        n_samples: spec.mc_samples,
        status: "ok".into(),
    };
    if let Err(e) = config.validate() {
        row.status = e.to_string();
        return row;
    }
    let breakdown = system_outage(&config);
    let mc = if spec.mc_samples > 0 {
        match mc_estimate(&config, spec.mc_samples, row_seed(spec.seed, index)) {
            Ok(r) => Some(r),
            Err(e) => {
                row.status = e.to_string();
                None
            }
        }
    } else {
        None
    };
    row.results = spec
        .schemes
        .iter()
        .map(|&scheme| {
            let (p_analytic, est) = match scheme {
                Scheme::Proposed => (breakdown.p_sys, mc.as_ref().map(|m| m.p_sys)),
                Scheme::Traditional => (
                    traditional_outage(&config),
                    mc.as_ref().map(|m| m.p_traditional),
                ),
                Scheme::FdOnly => (breakdown.p_fd, mc.as_ref().map(|m| m.p_fd)),
                Scheme::HdOnly => (breakdown.p_hd, mc.as_ref().map(|m| m.p_hd)),
            };
            SchemeResult {
                scheme,
                p_analytic,
                mc: est,
            }
        })
        .collect();
    row
}

/// Evaluates every grid point. Rows run in parallel but come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| evaluate_row(spec, i, v))
        .collect())
}

/// Base configuration of the reference sweeps: unit noise and channel means,
/// `R0 = 3`, both powers at 30 dB.
pub fn reference_defaults() -> SystemConfig {
    SystemConfig {
        p_s: db_to_linear(30.0),
        p_r: db_to_linear(30.0),
        sigma2: 1.0,
        k_r: 1.0 / db_to_linear(30.0),
        r0: 3.0,
        channel: crate::channel::ChannelParams::uniform(1.0).expect("unit means are valid"),
    }
}

/// The four reference sweeps with their default grids.
pub mod presets {
    use super::*;

    fn spec(
        variable: SweepVariable,
        start: f64,
        stop: f64,
        step: f64,
        schemes: Vec<Scheme>,
    ) -> SweepSpec {
        SweepSpec {
            variable,
            start,
            stop,
            step,
            base: reference_defaults(),
            rsi: RsiModel::Variance(1.0),
            mc_samples: 0,
            seed: 0,
            schemes,
        }
    }

    /// Relay power sweep, proposed vs traditional.
    pub fn relay_power() -> SweepSpec {
        spec(
            SweepVariable::PrDb,
            0.0,
            40.0,
            1.0,
            vec![Scheme::Proposed, Scheme::Traditional],
        )
    }

    /// Target-rate sweep, proposed vs traditional.
    pub fn target_rate() -> SweepSpec {
        spec(
            SweepVariable::R0,
            0.5,
            6.0,
            0.25,
            vec![Scheme::Proposed, Scheme::Traditional],
        )
    }

    /// Source power sweep, hybrid vs its two modes.
    pub fn source_power() -> SweepSpec {
        spec(
            SweepVariable::PsDb,
            0.0,
            40.0,
            1.0,
            vec![Scheme::Proposed, Scheme::FdOnly, Scheme::HdOnly],
        )
    }

    /// RSI variance sweep over [1e-2, 1e2].
    pub fn rsi_variance() -> SweepSpec {
        spec(
            SweepVariable::RsiVar,
            -20.0,
            20.0,
            1.0,
            vec![Scheme::Proposed, Scheme::FdOnly, Scheme::HdOnly],
        )
    }

    pub fn all() -> Vec<(&'static str, SweepSpec)> {
        vec![
            ("relay_power", relay_power()),
            ("target_rate", target_rate()),
            ("source_power", source_power()),
            ("rsi_variance", rsi_variance()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::oracle::mc_estimate;

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
    fn traditional_vanishes_with_rate() {
        let c = SystemConfig {
            r0: 1e-12,
            ..baseline()
        };
        assert!(traditional_outage(&c) < 1e-11);
    }

    #[test]
    fn traditional_matches_monte_carlo() {
        let configs = [
            baseline(),
            SystemConfig {
                k_r: 3.0,
                p_s: 4.0,
                ..baseline()
            },
            SystemConfig {
                p_s: 2.0,
                p_r: 0.5,
                k_r: 0.2,
                r0: 0.8,
                channel: ChannelParams::new(0.5, 2.0, 3.0, 1.2).unwrap(),
                ..baseline()
            },
            SystemConfig {
                k_r: 20.0,
                r0: 0.3,
                ..baseline()
            },
        ];
        for (i, c) in configs.iter().enumerate() {
            let r = mc_estimate(c, 1_000_000, 100 + i as u64).unwrap();
            let p = traditional_outage(c);
            assert!(
                r.p_traditional.within(p, 3.0),
                "config {i}: {p} vs {:?}",
                r.p_traditional
            );
        }
    }

    #[test]
    fn traditional_dominates_proposed() {
        for k_r in [0.0, 0.1, 1.0, 10.0] {
            for r0 in [0.25, 1.0, 3.0] {
                let c = SystemConfig {
                    k_r,
                    r0,
                    p_s: 5.0,
                    p_r: 2.0,
                    ..baseline()
                };
                assert!(system_outage(&c).p_sys <= traditional_outage(&c) + 1e-12);
            }
        }
    }

    #[test]
    fn grid_is_inclusive() {
        let s = presets::relay_power();
        let g = s.grid();
        assert_eq!(g.len(), 41);
        assert_eq!(g[40], 40.0);
        assert_eq!(presets::target_rate().grid().len(), 23);
    }

    #[test]
    fn rsi_variance_back_derives_coefficient() {
        let s = presets::relay_power();
        let c = s.config_at(20.0);
        assert!((c.rsi_variance() - 1.0).abs() < 1e-12);
        let s = presets::rsi_variance();
        let c = s.config_at(10.0);
        assert!((c.rsi_variance() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = presets::relay_power();
        s.step = 0.0;
        assert!(run_sweep(&s).is_err());
        let mut s = presets::relay_power();
        s.start = 50.0;
        assert!(run_sweep(&s).is_err());
        let mut s = presets::relay_power();
        s.schemes.clear();
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn invalid_row_reports_status() {
        let mut s = presets::relay_power();
        s.rsi = RsiModel::Coefficient(-1.0);
        let rows = run_sweep(&s).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.status.contains("k_r") && r.results.is_empty()));
    }

    #[test]
    fn scheme_names_parse() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("hd-only".parse::<Scheme>().unwrap(), Scheme::HdOnly);
        assert!("both".parse::<Scheme>().is_err());
    }

    #[test]
    fn db_round_trip() {
        for db in [-10.0, -3.3, 0.0, 12.5, 40.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
    }
}
