//! Outage analysis for a one-way decode-and-forward relay that switches per
//! block between full-duplex (FD) and half-duplex (HD) operation.
//!
//! The relay carries two antennas. In FD mode one antenna receives while the
//! other transmits, so the first hop suffers residual self-interference. In HD
//! mode both antennas receive (maximum ratio combining) and then both transmit
//! (maximum ratio transmission). The hybrid scheme picks whichever mode has the
//! larger instantaneous capacity, so the system is in outage only when both
//! modes are.
//!
//! Module map:
//!
//! - [`channel`]: exponential gain laws, sum-of-gains CDF, seeded sampling.
//! - [`modes`]: configuration, decision thresholds, SINRs, capacities.
//! - [`analytic`]: closed-form FD, HD and hybrid outage probabilities.
//! - [`oracle`]: Monte Carlo simulator and adaptive quadrature checks.
//! - [`experiments`]: single-antenna baseline and parameter sweeps.
//! - [`table`]: CSV/JSON rendering of sweep results.
//! - [`validation`]: the invariant gate suite behind `hdfd validate`.

pub mod analytic;
pub mod channel;
mod error;
pub mod experiments;
mod math;
pub mod modes;
pub mod oracle;
pub mod table;
pub mod validation;

pub use analytic::{system_outage, EventTag, EventTerms, OutageBreakdown};
pub use channel::{ChannelParams, GainSample};
pub use error::{Error, Result};
pub use experiments::{run_sweep, traditional_outage, Scheme, SweepRow, SweepSpec, SweepVariable};
pub use modes::{Mode, ModeDecision, SystemConfig, Thresholds};
pub use oracle::{mc_estimate, quad_conditional, Estimate, Hop, McReport};
