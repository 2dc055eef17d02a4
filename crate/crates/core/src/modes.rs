//! Per-realization physics: decision thresholds, SINRs, capacities and the
//! hybrid mode-selection rule.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, GainSample};
use crate::error::{Error, Result};

/// Scalar system parameters. Powers and noise are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Source transmit power.
    pub p_s: f64,
    /// Relay transmit power.
    pub p_r: f64,
    /// Noise variance at relay and destination.
    pub sigma2: f64,
    /// Residual self-interference coefficient; the RSI variance is `k_r · p_r`.
    pub k_r: f64,
    /// Target rate in bits/s/Hz.
    pub r0: f64,
    pub channel: ChannelParams,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_s", self.p_s),
            ("p_r", self.p_r),
            ("sigma2", self.sigma2),
            ("r0", self.r0),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig {
                    field,
                    value,
                    expected: "must be positive and finite",
                });
            }
        }
        if !(self.k_r.is_finite() && self.k_r >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "k_r",
                value: self.k_r,
                expected: "must be nonnegative and finite",
            });
        }
        self.channel.validate()
    }

    /// Residual self-interference variance `k_r · p_r`.
    pub fn rsi_variance(&self) -> f64 {
        self.k_r * self.p_r
    }

    /// Sets `k_r` so that the RSI variance equals `variance` at the current relay power.
    pub fn with_rsi_variance(mut self, variance: f64) -> Self {
        self.k_r = variance / self.p_r;
        self
    }

    pub fn thresholds(&self) -> Thresholds {
        compute_thresholds(self)
    }
}

/// Decision constants derived from a [`SystemConfig`].
///
/// `t1`/`t2` are the SINR thresholds of FD and HD operation; the `m*` values
/// are the same thresholds mapped onto squared-gain axes:
///
/// | constant | meaning |
/// |----------|---------|
/// | `m1` | FD source hop, on `g11` |
/// | `m3` | FD relay hop, on `g22` |
/// | `m2` | HD source hop, on `g11 + g12` |
/// | `m2p` | HD relay hop, on `g21 + g22` |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t1: f64,
    pub t2: f64,
    pub m1: f64,
    pub m2: f64,
    pub m2p: f64,
    pub m3: f64,
}

/// `2^x - 1`, exact at integer `x` and without cancellation for small `x`.
fn exp2_m1(x: f64) -> f64 {
    if x < 1.0 {
        (std::f64::consts::LN_2 * x).exp_m1()
    } else {
        x.exp2() - 1.0
    }
}

pub fn compute_thresholds(config: &SystemConfig) -> Thresholds {
    let t1 = exp2_m1(config.r0);
    let t2 = exp2_m1(2.0 * config.r0);
    Thresholds {
        t1,
        t2,
        m1: t1 * (config.rsi_variance() + config.sigma2) / config.p_s,
        m2: t2 * config.sigma2 / config.p_s,
        m2p: t2 * config.sigma2 / config.p_r,
        m3: t1 * config.sigma2 / config.p_r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "FD")]
    FullDuplex,
    #[serde(rename = "HD")]
    HalfDuplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDecision {
    pub c_fd: f64,
    pub c_hd: f64,
    pub selected: Mode,
    /// Both modes fall strictly below the target rate.
    pub outage: bool,
}

/// `(γ_f,r, γ_f,d)`: relay SINR under residual self-interference, destination SNR.
pub fn fd_sinr(sample: &GainSample, config: &SystemConfig) -> (f64, f64) {
    let gamma_fr = sample.g11 * config.p_s / (config.rsi_variance() + config.sigma2);
    let gamma_fd = sample.g22 * config.p_r / config.sigma2;
    (gamma_fr, gamma_fd)
}

/// `(γ_h,r, γ_h,d)` with MRC at the relay and MRT towards the destination.
pub fn hd_sinr(sample: &GainSample, config: &SystemConfig) -> (f64, f64) {
    let gamma_hr = (sample.g11 + sample.g12) * config.p_s / config.sigma2;
    let gamma_hd = (sample.g21 + sample.g22) * config.p_r / config.sigma2;
    (gamma_hr, gamma_hd)
}

/// HD SINRs when only antenna 1 receives and antenna 2 transmits, as in the
/// single-antenna hybrid baseline.
pub fn single_antenna_hd_sinr(sample: &GainSample, config: &SystemConfig) -> (f64, f64) {
    let gamma_hr = sample.g11 * config.p_s / config.sigma2;
    let gamma_hd = sample.g22 * config.p_r / config.sigma2;
    (gamma_hr, gamma_hd)
}

#[inline]
pub fn fd_capacity(gamma_r: f64, gamma_d: f64) -> f64 {
    let gamma = gamma_r.min(gamma_d);
    // log2 is exact at powers of two, which keeps rate boundaries sharp
    if gamma < 0.5 {
        gamma.ln_1p() / std::f64::consts::LN_2
    } else {
        (1.0 + gamma).log2()
    }
}

#[inline]
pub fn hd_capacity(gamma_r: f64, gamma_d: f64) -> f64 {
    0.5 * fd_capacity(gamma_r, gamma_d)
}

/// Selects the mode with the larger instantaneous capacity; ties go to FD.
pub fn select_mode(c_fd: f64, c_hd: f64, r0: f64) -> ModeDecision {
    let selected = if c_fd >= c_hd {
        Mode::FullDuplex
    } else {
        Mode::HalfDuplex
    };
    ModeDecision {
        c_fd,
        c_hd,
        selected,
        outage: c_fd.max(c_hd) < r0,
    }
}

pub fn capacities(sample: &GainSample, config: &SystemConfig) -> ModeDecision {
    let (fr, fd) = fd_sinr(sample, config);
    let (hr, hd) = hd_sinr(sample, config);
    select_mode(fd_capacity(fr, fd), hd_capacity(hr, hd), config.r0)
}
