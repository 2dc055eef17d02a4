//! Subcommand bodies. Each builds the output table; `main` renders it.

use hdfd::experiments::linear_to_db;
use hdfd::oracle::monte_carlo::GENERATOR;
use hdfd::table::{sweep_table, Cell, Table};
use hdfd::validation::{run_validation, ValidationOptions};
use hdfd::{
    mc_estimate, run_sweep, system_outage, traditional_outage, Estimate, EventTag, SystemConfig,
};

use crate::args::{McArgs, PointArgs, SweepArgs, UsageError, ValidateArgs};

pub enum Failure {
    Usage(UsageError),
    Runtime(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<hdfd::Error> for Failure {
    fn from(e: hdfd::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

const POWER_UNIT: &str =
    "dB relative to the noise variance (equal to dBm when the noise power is 1 mW)";

fn config_metadata(t: &mut Table, c: &SystemConfig) {
    let w = c.channel.as_array();
    t.meta("p_s", format!("{} ({:.6} dB)", c.p_s, linear_to_db(c.p_s)));
    t.meta("p_r", format!("{} ({:.6} dB)", c.p_r, linear_to_db(c.p_r)));
    t.meta("power_unit", POWER_UNIT);
    t.meta("sigma2", c.sigma2);
    t.meta("k_r", c.k_r);
    t.meta("rsi_var", c.rsi_variance());
    t.meta("r0", c.r0);
    t.meta("omega", format!("{},{},{},{}", w[0], w[1], w[2], w[3]));
}

pub fn point(args: &PointArgs) -> Result<Table, Failure> {
    let config = args.system.config()?;
    let b = system_outage(&config);
    let th = b.thresholds;
    let mut t = Table::new(&["quantity", "value"]);
    config_metadata(&mut t, &config);
    t.meta("seed", "none (closed form)");
    t.meta("n_samples", 0);
    for (name, v) in [
        ("t1", th.t1),
        ("t2", th.t2),
        ("m1", th.m1),
        ("m2", th.m2),
        ("m2p", th.m2p),
        ("m3", th.m3),
    ] {
        t.push(vec![name.into(), v.into()]);
    }
    for (name, v) in b.flatten() {
        t.push(vec![name.into(), v.into()]);
    }
    t.push(vec![
        "p_traditional".into(),
        traditional_outage(&config).into(),
    ]);
    Ok(t)
}

pub fn sweep(args: &SweepArgs) -> Result<Table, Failure> {
    let spec = args.spec()?;
    let rows = run_sweep(&spec)?;
    let mut t = sweep_table(spec.variable.name(), &rows);
    config_metadata(&mut t, &spec.base);
    t.meta("sweep_variable", spec.variable.name());
    t.meta(
        "range",
        format!("{}:{}:{}", spec.start, spec.stop, spec.step),
    );
    t.meta("rsi_held", format!("{:?}", spec.rsi));
    t.meta("seed", spec.seed);
    t.meta("n_samples", spec.mc_samples);
    if spec.mc_samples > 0 {
        t.meta("generator", GENERATOR);
        t.meta(
            "row_seed",
            "splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15)",
        );
    }
    Ok(t)
}

fn estimate_cells(est: Result<&Estimate, &hdfd::Error>, analytic: f64) -> [Cell; 4] {
    match est {
        Ok(e) => [
            e.p_hat.into(),
            e.stderr.into(),
            e.z_score(analytic).into(),
            "ok".into(),
        ],
        Err(err) => [
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            err.to_string().into(),
        ],
    }
}

pub fn mc(args: &McArgs) -> Result<Table, Failure> {
    let config = args.system.config()?;
    let report = mc_estimate(&config, args.mc, args.seed)?;
    let b = system_outage(&config);
    let mut t = Table::new(&[
        "quantity",
        "p_analytic",
        "p_mc",
        "stderr",
        "z",
        "n_samples",
        "seed",
        "status",
    ]);
    config_metadata(&mut t, &config);
    t.meta("seed", args.seed);
    t.meta("n_samples", args.mc);
    t.meta("generator", GENERATOR);
    let mut push = |name: String, analytic: f64, est: Result<&Estimate, &hdfd::Error>, n: u64| {
        let [p, se, z, status] = estimate_cells(est, analytic);
        t.push(vec![
            name.into(),
            analytic.into(),
            p,
            se,
            z,
            n.into(),
            args.seed.into(),
            status,
        ]);
    };
    push("p_fd".into(), b.p_fd, Ok(&report.p_fd), report.n);
    push("p_hd".into(), b.p_hd, Ok(&report.p_hd), report.n);
    push("p_sys".into(), b.p_sys, Ok(&report.p_sys), report.n);
    push(
        "p_traditional".into(),
        traditional_outage(&config),
        Ok(&report.p_traditional),
        report.n,
    );
    for tag in EventTag::ALL {
        let a = b.event(tag);
        let m = report.event(tag);
        let occurrences = report.counts.events[tag.index()].occurrences;
        push(
            format!("pr_{tag}"),
            a.probability,
            Ok(&m.probability),
            report.n,
        );
        let c = &a.conditional;
        for (suffix, analytic, est) in [
            ("sr", c.p_sr, &m.hd_sr),
            ("rd", c.p_rd, &m.hd_rd),
            ("joint", c.p_joint, &m.hd_joint),
            ("total", c.p_total, &m.hd_total),
        ] {
            push(
                format!("cond_{tag}_{suffix}"),
                analytic,
                est.as_ref(),
                occurrences,
            );
        }
    }
    Ok(t)
}

/// The gate table plus the names of any failed gates.
pub fn validate(args: &ValidateArgs) -> Result<(Table, Vec<&'static str>), Failure> {
    let opts = ValidationOptions {
        grid_size: args.grid_size as usize,
        quad_grid_size: args.quad_grid_size as usize,
        mc_samples: args.mc_samples,
        mc_configs: args.mc_configs as usize,
        seed: args.seed,
    };
    let report = match args.perturb_analytic {
        None => run_validation(&opts, system_outage),
        Some(delta) => run_validation(&opts, move |c: &SystemConfig| {
            let mut b = system_outage(c);
            b.events[EventTag::A.index()].probability *= 1.0 + delta;
            b
        }),
    };
    let mut t = report.table();
    t.meta("seed", args.seed);
    t.meta("grid_size", args.grid_size);
    t.meta("quad_grid_size", opts.quad_grid_size.min(opts.grid_size));
    t.meta("n_samples", args.mc_samples);
    t.meta("mc_configs", args.mc_configs);
    if args.mc_samples > 0 {
        t.meta("generator", GENERATOR);
    }
    if let Some(delta) = args.perturb_analytic {
        t.meta("perturb_analytic", delta);
    }
    t.meta("result", if report.passed() { "pass" } else { "fail" });
    Ok((t, report.failed_gates()))
}
