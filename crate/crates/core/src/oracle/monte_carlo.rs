//! Seeded, chunked Monte Carlo simulation of the full per-block protocol.
//!
//! Samples are split into fixed-size chunks. Chunk `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, and chunk counters are
//! integers summed after the fact, so the result depends only on
//! `(seed, n)` and never on how rayon schedules the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::EventTag;
use crate::channel::sample_gains;
use crate::error::{Error, Result};
use crate::modes::{
    fd_capacity, fd_sinr, hd_capacity, hd_sinr, single_antenna_hd_sinr, SystemConfig,
};

pub const CHUNK_SIZE: u64 = 1 << 16;

/// Conditional estimates need at least this many conditioning samples.
pub const MIN_CONDITIONING_SAMPLES: u64 = 100;

pub const GENERATOR: &str =
    "ChaCha8Rng(seed_from_u64(seed), stream = chunk index, 65536 samples/chunk)";

/// Outage indicators of one FD-failure event.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub occurrences: u64,
    pub hd_sr_out: u64,
    pub hd_rd_out: u64,
    pub hd_joint_out: u64,
    pub hd_out: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McCounts {
    pub n: u64,
    /// Blocks in which the FD mode meets the rate, i.e. no event occurs.
    pub fd_ok: u64,
    pub fd_out: u64,
    pub hd_out: u64,
    pub sys_out: u64,
    pub traditional_out: u64,
    pub selected_fd: u64,
    pub events: [EventCounts; 3],
}

impl std::ops::AddAssign for EventCounts {
    fn add_assign(&mut self, o: Self) {
        self.occurrences += o.occurrences;
        self.hd_sr_out += o.hd_sr_out;
        self.hd_rd_out += o.hd_rd_out;
        self.hd_joint_out += o.hd_joint_out;
        self.hd_out += o.hd_out;
    }
}

impl std::ops::Add for McCounts {
    type Output = McCounts;

    fn add(mut self, o: Self) -> Self {
        self.n += o.n;
        self.fd_ok += o.fd_ok;
        self.fd_out += o.fd_out;
        self.hd_out += o.hd_out;
        self.sys_out += o.sys_out;
        self.traditional_out += o.traditional_out;
        self.selected_fd += o.selected_fd;
        for (a, b) in self.events.iter_mut().zip(o.events) {
            *a += b;
        }
        self
    }
}

impl McCounts {
    fn record(&mut self, config: &SystemConfig, sample: &crate::channel::GainSample) {
        let r0 = config.r0;
        let (fr, fd) = fd_sinr(sample, config);
        let (hr, hd) = hd_sinr(sample, config);
        let fd_src_out = fd_capacity(fr, fr) < r0;
        let fd_rel_out = fd_capacity(fd, fd) < r0;
        let hd_src_out = hd_capacity(hr, hr) < r0;
        let hd_rel_out = hd_capacity(hd, hd) < r0;
        let c_fd = fd_capacity(fr, fd);
        let c_hd = hd_capacity(hr, hd);
        let decision = crate::modes::select_mode(c_fd, c_hd, r0);

        self.n += 1;
        let fd_out = c_fd < r0;
        let hd_out = c_hd < r0;
        self.fd_out += fd_out as u64;
        self.hd_out += hd_out as u64;
        self.sys_out += decision.outage as u64;
        self.selected_fd += (decision.selected == crate::modes::Mode::FullDuplex) as u64;

        let (sr1, rd1) = single_antenna_hd_sinr(sample, config);
        self.traditional_out += (fd_out && hd_capacity(sr1, rd1) < r0) as u64;

        match EventTag::from_hops(fd_src_out, fd_rel_out) {
            None => self.fd_ok += 1,
            Some(tag) => {
                let e = &mut self.events[tag.index()];
                e.occurrences += 1;
                e.hd_sr_out += hd_src_out as u64;
                e.hd_rd_out += hd_rel_out as u64;
                e.hd_joint_out += (hd_src_out && hd_rel_out) as u64;
                e.hd_out += hd_out as u64;
            }
        }
    }
}

/// A binomial proportion with its standard error `√(p̂(1-p̂)/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let p_hat = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let stderr = if n == 0 {
            0.0
        } else {
            (p_hat * (1.0 - p_hat) / n as f64).sqrt()
        };
        Estimate { p_hat, stderr, n }
    }

    /// Ratio estimator `hits / conditioning`, refused when too few
    /// conditioning samples were seen.
    pub fn conditional(hits: u64, conditioning: u64) -> Result<Self> {
        if conditioning < MIN_CONDITIONING_SAMPLES {
            return Err(Error::InsufficientSamples {
                count: conditioning,
                required: MIN_CONDITIONING_SAMPLES,
            });
        }
        Ok(Self::from_counts(hits, conditioning))
    }

    /// Number of standard errors separating the estimate from `p`, using
    /// the standard error implied by `p` itself (the null hypothesis).
    pub fn z_score(&self, p: f64) -> f64 {
        let se = (p * (1.0 - p) / self.n as f64).sqrt();
        let diff = self.p_hat - p;
        if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            diff / se
        }
    }

    pub fn within(&self, p: f64, sigmas: f64) -> bool {
        self.z_score(p).abs() <= sigmas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEventEstimates {
    pub tag: EventTag,
    pub probability: Estimate,
    pub hd_sr: Result<Estimate>,
    pub hd_rd: Result<Estimate>,
    pub hd_joint: Result<Estimate>,
    pub hd_total: Result<Estimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub seed: u64,
    pub n: u64,
    pub generator: String,
    pub counts: McCounts,
    pub p_fd: Estimate,
    pub p_hd: Estimate,
    pub p_sys: Estimate,
    /// Hybrid outage of the single-antenna baseline on the same draws.
    pub p_traditional: Estimate,
    pub events: Vec<McEventEstimates>,
}

impl McReport {
    pub fn event(&self, tag: EventTag) -> &McEventEstimates {
        &self.events[tag.index()]
    }
}

fn run_chunk(config: &SystemConfig, seed: u64, chunk: u64, len: u64) -> McCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut counts = McCounts::default();
    for _ in 0..len {
        let sample = sample_gains(&config.channel, &mut rng);
        counts.record(config, &sample);
    }
    counts
}

/// Raw counters for `n` blocks under `seed`.
pub fn mc_counts(config: &SystemConfig, n: u64, seed: u64) -> McCounts {
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            run_chunk(config, seed, k, len)
        })
        .reduce(McCounts::default, |a, b| a + b)
}

/// Monte Carlo estimates of every analytic quantity.
pub fn mc_estimate(config: &SystemConfig, n: u64, seed: u64) -> Result<McReport> {
    if n == 0 {
        return Err(Error::InvalidConfig {
            field: "n",
            value: 0.0,
            expected: "at least one sample",
        });
    }
    config.validate()?;
    let counts = mc_counts(config, n, seed);
    let events = EventTag::ALL
        .iter()
        .map(|&tag| {
            let e = counts.events[tag.index()];
            McEventEstimates {
                tag,
                probability: Estimate::from_counts(e.occurrences, n),
                hd_sr: Estimate::conditional(e.hd_sr_out, e.occurrences),
                hd_rd: Estimate::conditional(e.hd_rd_out, e.occurrences),
                hd_joint: Estimate::conditional(e.hd_joint_out, e.occurrences),
                hd_total: Estimate::conditional(e.hd_out, e.occurrences),
            }
        })
        .collect();
    Ok(McReport {
        seed,
        n,
        generator: GENERATOR.to_string(),
        counts,
        p_fd: Estimate::from_counts(counts.fd_out, n),
        p_hd: Estimate::from_counts(counts.hd_out, n),
        p_sys: Estimate::from_counts(counts.sys_out, n),
        p_traditional: Estimate::from_counts(counts.traditional_out, n),
        events,
    })
}
