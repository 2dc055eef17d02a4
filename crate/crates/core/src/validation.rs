//! Invariant gates run by `hdfd validate`.
//!
//! Every gate reads the closed forms through a caller-supplied function so a
//! deliberately broken model can be pushed through the same checks.

// Gate conditions are written as `!(x <= tol)` so a NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{EventTag, OutageBreakdown};
use crate::channel::ChannelParams;
use crate::experiments::{db_to_linear, presets, traditional_outage, SweepSpec};
use crate::modes::SystemConfig;
use crate::oracle::{mc_estimate, quad_conditional, Hop};
use crate::table::{Cell, Table};

pub const PARTITION_TOL: f64 = 1e-12;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const MC_SIGMAS: f64 = 3.0;
/// Fraction of Monte Carlo cells allowed outside the 3σ band.
pub const MC_EXCEEDANCE_SLACK: f64 = 0.05;
pub const DOMINANCE_TOL: f64 = 1e-12;
pub const CONTINUITY_PERTURBATION: f64 = 1e-7;
pub const CONTINUITY_TOL: f64 = 1e-6;
/// Minimum traditional/proposed ratio required somewhere on the rate sweep.
pub const MIN_IMPROVEMENT_RATIO: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub grid_size: usize,
    pub quad_grid_size: usize,
    pub mc_samples: u64,
    pub mc_configs: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            grid_size: 1000,
            quad_grid_size: 200,
            mc_samples: 1_000_000,
            mc_configs: 20,
            seed: 20170,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    /// Largest observed violation metric (gate-specific units).
    pub worst: f64,
    pub detail: String,
}

impl GateResult {
    fn new(
        name: &'static str,
        checked: usize,
        failures: usize,
        worst: f64,
        detail: impl Into<String>,
    ) -> Self {
        GateResult {
            name,
            passed: failures == 0,
            checked,
            failures,
            worst,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub gates: Vec<GateResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn failed_gates(&self) -> Vec<&'static str> {
        self.gates
            .iter()
            .filter(|g| !g.passed)
            .map(|g| g.name)
            .collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["gate", "passed", "checked", "failures", "worst", "detail"]);
        for g in &self.gates {
            t.push(vec![
                g.name.into(),
                g.passed.into(),
                (g.checked as u64).into(),
                (g.failures as u64).into(),
                Cell::Float(g.worst),
                g.detail.clone().into(),
            ]);
        }
        t
    }
}

/// Random configuration over the validation ranges: Ω log-uniform on
/// [0.1, 10], powers uniform on [-10, 40] dB, `k_r` on [0, 10], `R0` on
/// [0.25, 6], unit noise. `tie` forces exact equal means: 1 = all four
/// links, 2 = within each hop, anything else = independent draws.
pub fn random_config<R: Rng + ?Sized>(rng: &mut R, tie: u8) -> SystemConfig {
    let mut omega = || 10f64.powf(rng.random_range(-1.0..=1.0));
    let mut w = [omega(), omega(), omega(), omega()];
    match tie {
        1 => w = [w[0]; 4],
        2 => {
            w[1] = w[0];
            w[2] = w[3];
        }
        _ => {}
    }
    SystemConfig {
        p_s: db_to_linear(rng.random_range(-10.0..=40.0)),
        p_r: db_to_linear(rng.random_range(-10.0..=40.0)),
        sigma2: 1.0,
        k_r: rng.random_range(0.0..=10.0),
        r0: rng.random_range(0.25..=6.0),
        channel: ChannelParams::new(w[0], w[1], w[2], w[3]).expect("positive means"),
    }
}

/// `n` configurations; every third has all means equal and every third
/// after that has equal means within each hop.
pub fn random_grid(n: usize, seed: u64) -> Vec<SystemConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| random_config(&mut rng, (i % 3) as u8 + 1))
        .collect()
}

/// Configurations whose outage probabilities sit away from 0 and 1, where
/// Monte Carlo comparisons carry information.
pub fn moderate_grid(n: usize, seed: u64) -> Vec<SystemConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut i = 0u8;
    while out.len() < n {
        let mut c = random_config(&mut rng, i % 3 + 1);
        i = i.wrapping_add(1);
        c.p_s = db_to_linear(rng.random_range(0.0..=25.0));
        c.p_r = db_to_linear(rng.random_range(0.0..=25.0));
        c.r0 = rng.random_range(0.25..=3.0);
        c.k_r = rng.random_range(0.0..=1.0);
        let b = crate::analytic::system_outage(&c);
        if b.p_sys > 1e-3 && b.p_fd < 0.999 && b.p_hd < 0.999 {
            out.push(c);
        }
    }
    out
}

pub fn partition_gate<F>(configs: &[SystemConfig], analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let errs: Vec<f64> = configs
        .par_iter()
        .map(|c| {
            let b = analytic(c);
            (b.event_sum() - b.p_fd).abs()
        })
        .collect();
    let failures = errs.iter().filter(|e| !(**e <= PARTITION_TOL)).count();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    GateResult::new(
        "partition_identity",
        configs.len(),
        failures,
        worst,
        format!("|Pr(A)+Pr(B)+Pr(C) - p_fd| <= {PARTITION_TOL:e}"),
    )
}

pub fn breakdown_gate<F>(configs: &[SystemConfig], analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let errs: Vec<f64> = configs
        .par_iter()
        .map(|c| {
            let b = analytic(c);
            let range = b
                .flatten()
                .iter()
                .map(|(_, v)| {
                    if (0.0..=1.0).contains(v) {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0, f64::max);
            let assembled: f64 = b
                .events
                .iter()
                .map(|e| e.probability * e.conditional.p_total)
                .sum();
            let sum_err = (assembled - b.p_sys).abs();
            let dom = (b.p_sys - b.p_fd.min(b.p_hd)).max(0.0);
            range.max(sum_err).max(dom)
        })
        .collect();
    let failures = errs.iter().filter(|e| !(**e <= DOMINANCE_TOL)).count();
    GateResult::new(
        "breakdown_invariants",
        configs.len(),
        failures,
        errs.iter().copied().fold(0.0, f64::max),
        "probabilities in [0,1]; p_sys = sum Pr(e) cond(e); p_sys <= min(p_fd, p_hd)",
    )
}

pub fn quadrature_gate<F>(configs: &[SystemConfig], analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let per_config: Vec<(usize, f64, Option<String>)> = configs
        .par_iter()
        .map(|c| {
            let b = analytic(c);
            let mut fails = 0;
            let mut worst: f64 = 0.0;
            let mut note = None;
            for tag in EventTag::ALL {
                let cond = b.event(tag).conditional;
                for hop in Hop::ALL {
                    let closed = match hop {
                        Hop::SourceRelay => cond.p_sr,
                        Hop::RelayDestination => cond.p_rd,
                    };
                    match quad_conditional(tag, hop, c) {
                        Ok(q) => {
                            let err = (q - closed).abs();
                            worst = worst.max(err);
                            if !(err <= QUADRATURE_TOL) {
                                fails += 1;
                                note.get_or_insert_with(|| {
                                    format!("event {tag} hop {}: {closed} vs {q}", hop.name())
                                });
                            }
                        }
                        Err(e) => {
                            fails += 1;
                            worst = f64::INFINITY;
                            note.get_or_insert_with(|| {
                                format!("event {tag} hop {}: {e}", hop.name())
                            });
                        }
                    }
                }
            }
            (fails, worst, note)
        })
        .collect();
    let failures = per_config.iter().map(|x| x.0).sum();
    let worst = per_config.iter().map(|x| x.1).fold(0.0, f64::max);
    let first = per_config.iter().find_map(|x| x.2.clone());
    GateResult::new(
        "quadrature_agreement",
        configs.len() * 6,
        failures,
        worst,
        first.unwrap_or_else(|| {
            format!("6 conditional hop outages within {QUADRATURE_TOL:e} of quadrature")
        }),
    )
}

/// Monte Carlo agreement of `p_fd`, `p_hd`, `p_sys`, plus the traditional
/// baseline and the per-event joint HD outage (which the closed form takes
/// as the product of the two hop conditionals), each allowing
/// [`MC_EXCEEDANCE_SLACK`] of cells outside the 3σ band.
pub fn monte_carlo_gates<F>(
    configs: &[SystemConfig],
    n: u64,
    seed: u64,
    analytic: &F,
) -> Vec<GateResult>
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let mut z_main = Vec::new();
    let mut z_trad = Vec::new();
    let mut z_factor = Vec::new();
    let mut errors = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        let report = match mc_estimate(c, n, seed.wrapping_add(i as u64)) {
            Ok(r) => r,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let b = analytic(c);
        z_main.push(report.p_fd.z_score(b.p_fd).abs());
        z_main.push(report.p_hd.z_score(b.p_hd).abs());
        z_main.push(report.p_sys.z_score(b.p_sys).abs());
        z_trad.push(report.p_traditional.z_score(traditional_outage(c)).abs());
        for e in &report.events {
            let cond = &b.event(e.tag).conditional;
            for (est, p) in [(&e.hd_joint, cond.p_joint), (&e.hd_total, cond.p_total)] {
                if let Ok(est) = est {
                    z_factor.push(est.z_score(p).abs());
                }
            }
        }
    }
    let gate = |name: &'static str, zs: &[f64], what: &str| {
        let exceed = zs.iter().filter(|z| !(**z <= MC_SIGMAS)).count();
        let allowed = (MC_EXCEEDANCE_SLACK * zs.len() as f64).floor() as usize;
        let mut g = GateResult::new(
            name,
            zs.len(),
            exceed,
            zs.iter().copied().fold(0.0, f64::max),
            format!(
                "{what}: {exceed}/{} cells beyond {MC_SIGMAS} sigma (allowed {allowed}), N = {n}",
                zs.len()
            ),
        );
        g.passed = exceed <= allowed && errors.is_empty() && !zs.is_empty();
        if !errors.is_empty() {
            g.detail = format!("{}; errors: {}", g.detail, errors.join("; "));
        }
        g
    };
    vec![
        gate("monte_carlo_agreement", &z_main, "p_fd, p_hd, p_sys"),
        gate(
            "monte_carlo_traditional",
            &z_trad,
            "single-antenna baseline",
        ),
        gate(
            "monte_carlo_factorization",
            &z_factor,
            "joint and total HD outage given each FD event",
        ),
    ]
}

fn preset_grid(spec: &SweepSpec) -> Vec<(f64, SystemConfig)> {
    spec.grid()
        .into_iter()
        .map(|v| (v, spec.config_at(v)))
        .collect()
}

pub fn dominance_gate<F>(configs: &[SystemConfig], analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let mut all: Vec<SystemConfig> = configs.to_vec();
    for (_, spec) in presets::all() {
        all.extend(preset_grid(&spec).into_iter().map(|(_, c)| c));
    }
    let excess: Vec<f64> = all
        .par_iter()
        .map(|c| {
            let b = analytic(c);
            b.p_sys - b.p_fd.min(b.p_hd)
        })
        .collect();
    let failures = excess.iter().filter(|e| !(**e <= DOMINANCE_TOL)).count();
    GateResult::new(
        "hybrid_dominance",
        all.len(),
        failures,
        excess.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "p_sys <= min(p_fd, p_hd) + 1e-12 on random and sweep grids",
    )
}

/// Largest traditional/proposed ratio on a grid.
pub fn best_improvement<F>(spec: &SweepSpec, analytic: &F) -> (f64, f64)
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    preset_grid(spec)
        .into_iter()
        .map(|(v, c)| (v, traditional_outage(&c) / analytic(&c).p_sys))
        .fold(
            (f64::NAN, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
}

pub fn traditional_gate<F>(analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let mut checked = 0;
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for spec in [presets::relay_power(), presets::target_rate()] {
        for (_, c) in preset_grid(&spec) {
            let excess = analytic(&c).p_sys - traditional_outage(&c);
            worst = worst.max(excess);
            checked += 1;
            if !(excess <= DOMINANCE_TOL) {
                failures += 1;
            }
        }
    }
    let (at, ratio) = best_improvement(&presets::target_rate(), analytic);
    if !(ratio >= MIN_IMPROVEMENT_RATIO) {
        failures += 1;
    }
    GateResult::new(
        "traditional_ordering",
        checked + 1,
        failures,
        worst,
        format!("proposed <= traditional on relay-power and rate sweeps; best ratio {ratio:.3e} at R0 = {at}"),
    )
}

pub fn crossover_gate<F>(analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let grid = preset_grid(&presets::source_power());
    let diffs: Vec<(f64, f64)> = grid
        .iter()
        .map(|(v, c)| {
            let b = analytic(c);
            (*v, b.p_fd - b.p_hd)
        })
        .collect();
    let fd_better = diffs.iter().filter(|d| d.1 < 0.0).count();
    let hd_better = diffs.iter().filter(|d| d.1 > 0.0).count();
    let crossover = diffs
        .windows(2)
        .find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0)
        .map(|w| w[1].0);
    let failures = usize::from(fd_better == 0) + usize::from(hd_better == 0);
    GateResult::new(
        "source_power_crossover",
        diffs.len(),
        failures,
        f64::NAN,
        format!("FD-only better at {fd_better} points, HD-only better at {hd_better}; crossover at {crossover:?} dB"),
    )
}

pub fn rsi_gate<F>(analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let rows: Vec<OutageBreakdown> = preset_grid(&presets::rsi_variance())
        .iter()
        .map(|(_, c)| analytic(c))
        .collect();
    let hd0 = rows[0].p_hd;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (i, b) in rows.iter().enumerate() {
        let drift = (b.p_hd - hd0).abs();
        worst = worst.max(drift);
        if !(drift <= DOMINANCE_TOL) {
            failures += 1;
        }
        if i > 0 && b.p_fd < rows[i - 1].p_fd {
            failures += 1;
        }
        if b.p_sys > b.p_fd.min(b.p_hd) + DOMINANCE_TOL {
            failures += 1;
        }
    }
    GateResult::new(
        "rsi_behaviour",
        rows.len(),
        failures,
        worst,
        "HD-only constant, FD-only nondecreasing, proposed below both across the RSI sweep",
    )
}

pub fn monotonicity_gate<F>(analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let mut failures = 0;
    let mut checked = 0;
    let rate: Vec<_> = preset_grid(&presets::target_rate())
        .iter()
        .map(|(_, c)| (analytic(c).p_sys, traditional_outage(c)))
        .collect();
    for w in rate.windows(2) {
        checked += 1;
        if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
            failures += 1;
        }
    }
    let power: Vec<_> = preset_grid(&presets::source_power())
        .iter()
        .map(|(_, c)| analytic(c))
        .collect();
    for w in power.windows(2) {
        checked += 1;
        if w[1].p_sys > w[0].p_sys || w[1].p_fd > w[0].p_fd || w[1].p_hd > w[0].p_hd {
            failures += 1;
        }
    }
    GateResult::new(
        "sweep_monotonicity",
        checked,
        failures,
        f64::NAN,
        "nondecreasing in R0, nonincreasing in P_S",
    )
}

fn perturbed(c: &SystemConfig, link: usize, factor: f64) -> SystemConfig {
    let mut w = c.channel.as_array();
    w[link] *= factor;
    SystemConfig {
        channel: ChannelParams::new(w[0], w[1], w[2], w[3]).expect("perturbed means stay positive"),
        ..*c
    }
}

pub fn continuity_gate<F>(configs: &[SystemConfig], analytic: &F) -> GateResult
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let worst_per: Vec<f64> = configs
        .par_iter()
        .map(|c| {
            let base = analytic(c).flatten();
            let mut worst: f64 = 0.0;
            for link in 0..4 {
                for sign in [-1.0, 1.0] {
                    let moved = analytic(&perturbed(c, link, 1.0 + sign * CONTINUITY_PERTURBATION))
                        .flatten();
                    for ((_, a), (_, b)) in base.iter().zip(&moved) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
            worst
        })
        .collect();
    let failures = worst_per
        .iter()
        .filter(|w| !(**w <= CONTINUITY_TOL))
        .count();
    GateResult::new(
        "equal_rate_continuity",
        configs.len() * 8,
        failures,
        worst_per.iter().copied().fold(0.0, f64::max),
        format!("every output moves <= {CONTINUITY_TOL:e} under ±{CONTINUITY_PERTURBATION:e} relative Ω perturbations"),
    )
}

pub fn run_validation<F>(opts: &ValidationOptions, analytic: F) -> ValidationReport
where
    F: Fn(&SystemConfig) -> OutageBreakdown + Sync,
{
    let grid = random_grid(opts.grid_size, opts.seed);
    let quad_grid = &grid[..opts.quad_grid_size.min(grid.len())];
    let mut gates = vec![
        partition_gate(&grid, &analytic),
        breakdown_gate(&grid, &analytic),
        quadrature_gate(quad_grid, &analytic),
    ];
    if opts.mc_samples > 0 && opts.mc_configs > 0 {
        let mc_grid = moderate_grid(opts.mc_configs, opts.seed ^ 0x5EED);
        gates.extend(monte_carlo_gates(
            &mc_grid,
            opts.mc_samples,
            opts.seed,
            &analytic,
        ));
    }
    gates.push(dominance_gate(&grid, &analytic));
    gates.push(traditional_gate(&analytic));
    gates.push(crossover_gate(&analytic));
    gates.push(rsi_gate(&analytic));
    gates.push(monotonicity_gate(&analytic));
    let continuity_grid = &grid[..grid.len().min(300)];
    gates.push(continuity_gate(continuity_grid, &analytic));
    ValidationReport { gates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::system_outage;

    #[test]
    fn random_grid_is_reproducible_and_in_range() {
        let a = random_grid(60, 3);
        assert_eq!(a, random_grid(60, 3));
        for (i, c) in a.iter().enumerate() {
            assert!(c.validate().is_ok());
            assert!((0.25..=6.0).contains(&c.r0));
            assert!((0.0..=10.0).contains(&c.k_r));
            for w in c.channel.as_array() {
                assert!((0.1 - 1e-12..=10.0 + 1e-12).contains(&w));
            }
            if i % 3 == 0 {
                let w = c.channel.as_array();
                assert!(w.iter().all(|x| *x == w[0]));
            }
        }
    }

    #[test]
    fn analytic_only_run_passes() {
        let opts = ValidationOptions {
            grid_size: 120,
            quad_grid_size: 30,
            mc_samples: 0,
            ..Default::default()
        };
        let report = run_validation(&opts, system_outage);
        assert!(report.passed(), "{:?}", report.failed_gates());
    }

    #[test]
    fn corrupted_model_is_caught() {
        let opts = ValidationOptions {
            grid_size: 60,
            quad_grid_size: 10,
            mc_samples: 0,
            ..Default::default()
        };
        let report = run_validation(&opts, |c: &SystemConfig| {
            let mut b = system_outage(c);
            b.events[0].probability += 1e-6;
            b
        });
        assert!(report.failed_gates().contains(&"partition_identity"));
    }
}
