//! Closed-form outage probabilities of the FD mode, the MRC/MRT HD mode and
//! the hybrid scheme.
//!
//! FD outage splits into three disjoint events over the two FD hops:
//!
//! - `A`: source hop in outage (`g11 < m1`), relay hop fine (`g22 ≥ m3`)
//! - `B`: source hop fine (`g11 ≥ m1`), relay hop in outage (`g22 < m3`)
//! - `C`: both hops in outage
//!
//! Each event is a product set in `(g11, g22)`, so conditioned on it the HD
//! source hop (`g11 + g12 < m2`) and HD relay hop (`g21 + g22 < m2p`) stay
//! independent. The hybrid outage is then
//! `Σ_e Pr{e} · (p_sr + p_rd - p_sr·p_rd)`.
//!
//! Conditioned hops reduce to one of two shapes. With `X` the conditioned
//! gain (rate `a`), `Y` the free gain (rate `b`), threshold `m` and cut `c`:
//!
//! - below the cut: `P(X+Y<m | X<c) = ∫_0^{min(c,m)} a e^{-ax} (1 - e^{-b(m-x)}) dx / (1 - e^{-ac})`
//! - above the cut: `P(X+Y<m | X>c) = F_{X+Y}(m - c)` by memorylessness, zero when `c ≥ m`.

use serde::{Deserialize, Serialize};

use crate::channel::sum_exp_cdf;
use crate::math::{clamp_probability, exp_ramp_integral, one_minus_exp_neg};
use crate::modes::{compute_thresholds, SystemConfig, Thresholds};

/// Conditioning probabilities at or below this value are treated as empty.
pub const DEGENERATE_CONDITIONING: f64 = 1e-300;

/// Which way the FD mode fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventTag {
    /// Source hop only.
    A,
    /// Relay hop only.
    B,
    /// Both hops.
    C,
}

impl EventTag {
    pub const ALL: [EventTag; 3] = [EventTag::A, EventTag::B, EventTag::C];

    pub fn index(self) -> usize {
        match self {
            EventTag::A => 0,
            EventTag::B => 1,
            EventTag::C => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EventTag::A => "A",
            EventTag::B => "B",
            EventTag::C => "C",
        }
    }

    /// `(source hop in FD outage, relay hop in FD outage)`.
    pub fn hop_outages(self) -> (bool, bool) {
        match self {
            EventTag::A => (true, false),
            EventTag::B => (false, true),
            EventTag::C => (true, true),
        }
    }

    pub fn from_hops(source_out: bool, relay_out: bool) -> Option<EventTag> {
        match (source_out, relay_out) {
            (true, false) => Some(EventTag::A),
            (false, true) => Some(EventTag::B),
            (true, true) => Some(EventTag::C),
            (false, false) => None,
        }
    }
}

impl std::fmt::Display for EventTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Conditional HD outage terms given one FD-failure event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopConditionals {
    pub p_sr: f64,
    pub p_rd: f64,
    pub p_joint: f64,
    pub p_total: f64,
    /// The conditioning event had (numerically) zero probability and the
    /// unconditioned hop outage was substituted.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventTerms {
    pub tag: EventTag,
    pub probability: f64,
    pub conditional: HopConditionals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageBreakdown {
    pub thresholds: Thresholds,
    pub p_fd: f64,
    pub p_hd: f64,
    pub p_sys: f64,
    pub events: [EventTerms; 3],
}

impl OutageBreakdown {
    pub fn event(&self, tag: EventTag) -> &EventTerms {
        &self.events[tag.index()]
    }

    pub fn event_sum(&self) -> f64 {
        self.events.iter().map(|e| e.probability).sum()
    }

    pub fn any_degenerate(&self) -> bool {
        self.events.iter().any(|e| e.conditional.degenerate)
    }

    /// Every scalar output, in a fixed order, for bulk comparisons.
    pub fn flatten(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("p_fd".to_string(), self.p_fd),
            ("p_hd".to_string(), self.p_hd),
            ("p_sys".to_string(), self.p_sys),
        ];
        for e in &self.events {
            let t = e.tag.name();
            out.push((format!("pr_{t}"), e.probability));
            out.push((format!("cond_{t}_sr"), e.conditional.p_sr));
            out.push((format!("cond_{t}_rd"), e.conditional.p_rd));
            out.push((format!("cond_{t}_joint"), e.conditional.p_joint));
            out.push((format!("cond_{t}_total"), e.conditional.p_total));
        }
        out
    }
}

/// `P(g11 < m1)` and `P(g22 < m3)`, the two FD hop outages.
fn fd_hop_outages(config: &SystemConfig, t: &Thresholds) -> (f64, f64) {
    let ch = &config.channel;
    (
        one_minus_exp_neg(ch.lambda_11() * t.m1),
        one_minus_exp_neg(ch.lambda_22() * t.m3),
    )
}

pub fn fd_outage(config: &SystemConfig) -> f64 {
    let t = compute_thresholds(config);
    let ch = &config.channel;
    one_minus_exp_neg(ch.lambda_11() * t.m1 + ch.lambda_22() * t.m3)
}

/// Unconditioned HD hop outages `(F_sr(m2), F_rd(m2p))`.
fn hd_hop_outages(config: &SystemConfig, t: &Thresholds) -> (f64, f64) {
    let ch = &config.channel;
    (
        sum_exp_cdf(ch.lambda_11(), ch.lambda_12(), t.m2),
        sum_exp_cdf(ch.lambda_21(), ch.lambda_22(), t.m2p),
    )
}

fn union(p: f64, q: f64) -> f64 {
    clamp_probability(p + q - p * q)
}

pub fn hd_outage(config: &SystemConfig) -> f64 {
    let t = compute_thresholds(config);
    let (sr, rd) = hd_hop_outages(config, &t);
    union(sr, rd)
}

pub fn event_probability(tag: EventTag, config: &SystemConfig) -> f64 {
    let t = compute_thresholds(config);
    event_probability_with(tag, config, &t)
}

fn event_probability_with(tag: EventTag, config: &SystemConfig, t: &Thresholds) -> f64 {
    let (src_out, rel_out) = fd_hop_outages(config, t);
    let ch = &config.channel;
    let src_ok = (-ch.lambda_11() * t.m1).exp();
    let rel_ok = (-ch.lambda_22() * t.m3).exp();
    match tag {
        EventTag::A => src_out * rel_ok,
        EventTag::B => src_ok * rel_out,
        EventTag::C => src_out * rel_out,
    }
}

/// One HD hop seen through the FD conditioning: the conditioned gain `X`
/// (rate `conditioned_rate`), the free gain `Y`, and the sum threshold.
#[derive(Debug, Clone, Copy)]
struct HopLaw {
    conditioned_rate: f64,
    free_rate: f64,
    threshold: f64,
}

#[derive(Debug, Clone, Copy)]
enum Cut {
    Below(f64),
    Above(f64),
}

impl HopLaw {
    fn unconditioned(&self) -> f64 {
        sum_exp_cdf(self.conditioned_rate, self.free_rate, self.threshold)
    }

    /// `P(X + Y < m | cut)` and whether the degenerate fallback was used.
    fn conditional(&self, cut: Cut) -> (f64, bool) {
        let (a, b, m) = (self.conditioned_rate, self.free_rate, self.threshold);
        match cut {
            Cut::Above(c) => {
                if c >= m {
                    (0.0, false)
                } else {
                    (sum_exp_cdf(a, b, m - c), false)
                }
            }
            Cut::Below(c) => {
                let mass = one_minus_exp_neg(a * c);
                if mass.is_nan() || mass <= DEGENERATE_CONDITIONING {
                    return (self.unconditioned(), true);
                }
                let upper = c.min(m);
                if upper <= 0.0 {
                    return (0.0, false);
                }
                let joint =
                    one_minus_exp_neg(a * upper) - a * exp_ramp_integral(a, b, m, 0.0, upper);
                (clamp_probability(joint.max(0.0) / mass), false)
            }
        }
    }
}

fn hop_laws(config: &SystemConfig, t: &Thresholds) -> (HopLaw, HopLaw) {
    let ch = &config.channel;
    let source = HopLaw {
        conditioned_rate: ch.lambda_11(),
        free_rate: ch.lambda_12(),
        threshold: t.m2,
    };
    let relay = HopLaw {
        conditioned_rate: ch.lambda_22(),
        free_rate: ch.lambda_21(),
        threshold: t.m2p,
    };
    (source, relay)
}

pub fn conditional_hd_outage(tag: EventTag, config: &SystemConfig) -> HopConditionals {
    let t = compute_thresholds(config);
    conditional_hd_outage_with(tag, config, &t)
}

fn conditional_hd_outage_with(
    tag: EventTag,
    config: &SystemConfig,
    t: &Thresholds,
) -> HopConditionals {
    let (source, relay) = hop_laws(config, t);
    let (src_out, rel_out) = tag.hop_outages();
    let src_cut = if src_out {
        Cut::Below(t.m1)
    } else {
        Cut::Above(t.m1)
    };
    let rel_cut = if rel_out {
        Cut::Below(t.m3)
    } else {
        Cut::Above(t.m3)
    };
    let (p_sr, d_sr) = source.conditional(src_cut);
    let (p_rd, d_rd) = relay.conditional(rel_cut);
    HopConditionals {
        p_sr,
        p_rd,
        p_joint: p_sr * p_rd,
        p_total: union(p_sr, p_rd),
        degenerate: d_sr || d_rd,
    }
}

/// Full breakdown of the hybrid outage.
pub fn system_outage(config: &SystemConfig) -> OutageBreakdown {
    let t = compute_thresholds(config);
    let events = EventTag::ALL.map(|tag| EventTerms {
        tag,
        probability: event_probability_with(tag, config, &t),
        conditional: conditional_hd_outage_with(tag, config, &t),
    });
    let p_sys = events
        .iter()
        .map(|e| e.probability * e.conditional.p_total)
        .sum::<f64>();
    let (sr, rd) = hd_hop_outages(config, &t);
    let ch = &config.channel;
    OutageBreakdown {
        thresholds: t,
        p_fd: one_minus_exp_neg(ch.lambda_11() * t.m1 + ch.lambda_22() * t.m3),
        p_hd: union(sr, rd),
        p_sys: clamp_probability(p_sys),
        events,
    }
}
