//! Independent verification engines for the closed forms.
//!
//! [`mc_estimate`] simulates the protocol block by block from raw gains and
//! capacities; [`quad_conditional`] integrates the conditional hop outages
//! numerically. Neither calls into [`crate::analytic`].

pub mod monte_carlo;
pub mod quadrature;

pub use monte_carlo::{mc_counts, mc_estimate, Estimate, McCounts, McEventEstimates, McReport};
pub use quadrature::{integrate, quad_conditional, Hop};
