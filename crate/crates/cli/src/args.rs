//! Command-line grammar and the mapping from flags to core configurations.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdfd::experiments::{db_to_linear, presets, RsiModel};
use hdfd::table::Format;
use hdfd::{ChannelParams, Scheme, SweepSpec, SweepVariable, SystemConfig};

pub const DEFAULT_POWER_DB: f64 = 30.0;
pub const DEFAULT_RSI_VARIANCE: f64 = 1.0;
pub const DEFAULT_R0: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(
    name = "hdfd",
    version,
    about = "Outage analysis of a hybrid HD/FD decode-and-forward relay with MRC/MRT",
    long_about = "Outage analysis of a two-antenna decode-and-forward relay that picks full-duplex or \
                  half-duplex (MRC/MRT) operation per block. Powers are in dB relative to the noise \
                  variance unless given in linear form.\n\nExit codes: 0 success, 1 validation \
                  failure, 2 usage error."
)]
pub struct Cli {
    /// Worker threads for Monte Carlo and sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form outage breakdown at one operating point.
    Point(PointArgs),
    /// Sweep one parameter and tabulate per-scheme outage.
    Sweep(SweepArgs),
    /// Monte Carlo estimates next to the closed forms at one operating point.
    Mc(McArgs),
    /// Run the invariant gate suite; exits 1 if any gate fails.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Source power in dB relative to the noise variance.
    #[arg(
        long,
        value_name = "DB",
        allow_negative_numbers = true,
        conflicts_with = "ps"
    )]
    pub ps_db: Option<f64>,
    /// Source power, linear.
    #[arg(long, value_name = "P", allow_negative_numbers = true)]
    pub ps: Option<f64>,
    /// Relay power in dB relative to the noise variance.
    #[arg(
        long,
        value_name = "DB",
        allow_negative_numbers = true,
        conflicts_with = "pr"
    )]
    pub pr_db: Option<f64>,
    /// Relay power, linear.
    #[arg(long, value_name = "P", allow_negative_numbers = true)]
    pub pr: Option<f64>,
    /// Noise variance at relay and destination.
    #[arg(
        long,
        value_name = "S2",
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub sigma2: f64,
    /// Residual self-interference coefficient (RSI variance = kr * relay power).
    #[arg(
        long,
        value_name = "K",
        allow_negative_numbers = true,
        conflicts_with = "rsi_var"
    )]
    pub kr: Option<f64>,
    /// Residual self-interference variance, linear [default: 1].
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    pub rsi_var: Option<f64>,
    /// Target rate in bits/s/Hz.
    #[arg(long, value_name = "R", default_value_t = DEFAULT_R0, allow_negative_numbers = true)]
    pub r0: f64,
    /// Mean channel gains Ω11,Ω12,Ω21,Ω22, or one value for all links.
    #[arg(
        long,
        value_name = "W",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub omega: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarArg {
    PrDb,
    PsDb,
    R0,
    /// RSI variance in dB, so a uniform step is a log-spaced grid.
    RsiVar,
}

impl From<VarArg> for SweepVariable {
    fn from(v: VarArg) -> Self {
        match v {
            VarArg::PrDb => SweepVariable::PrDb,
            VarArg::PsDb => SweepVariable::PsDb,
            VarArg::R0 => SweepVariable::R0,
            VarArg::RsiVar => SweepVariable::RsiVar,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Swept variable.
    #[arg(long = "var", value_enum, value_name = "VAR")]
    pub var: VarArg,
    /// First grid value [default: the variable's standard grid].
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Last grid value, inclusive.
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// Comma-separated subset of proposed, traditional, fd_only, hd_only.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme,
          default_value = "proposed,traditional,fd_only,hd_only")]
    pub schemes: Vec<Scheme>,
    /// Monte Carlo samples per grid point (0 = analytic only).
    #[arg(long = "mc", value_name = "N", default_value_t = 0)]
    pub mc: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Number of simulated blocks.
    #[arg(long = "mc", value_name = "N", default_value_t = 1_000_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub mc: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Randomized configurations for the closed-form gates.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub grid_size: u64,
    /// How many of those are also checked against quadrature.
    #[arg(long, default_value_t = 200)]
    pub quad_grid_size: u64,
    /// Monte Carlo samples per configuration (0 skips the Monte Carlo gates).
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: u64,
    /// Configurations checked against Monte Carlo.
    #[arg(long, default_value_t = 20)]
    pub mc_configs: u64,
    #[arg(long, default_value_t = 20170)]
    pub seed: u64,
    /// Scale the closed-form Pr{A} by (1 + DELTA) to exercise the gates.
    #[arg(long, hide = true, value_name = "DELTA", allow_negative_numbers = true)]
    pub perturb_analytic: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: hdfd::Error| e.to_string())
}

/// A flag value the core rejected, reported against the flag that set it.
#[derive(Debug)]
pub struct UsageError {
    pub flag: &'static str,
    pub message: String,
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid value for '{}': {}", self.flag, self.message)
    }
}

fn usage(flag: &'static str, message: impl Into<String>) -> UsageError {
    UsageError {
        flag,
        message: message.into(),
    }
}

impl SystemArgs {
    fn source_flag(&self) -> &'static str {
        if self.ps.is_some() {
            "--ps"
        } else {
            "--ps-db"
        }
    }

    fn relay_flag(&self) -> &'static str {
        if self.pr.is_some() {
            "--pr"
        } else {
            "--pr-db"
        }
    }

    fn rsi_flag(&self) -> &'static str {
        if self.kr.is_some() {
            "--kr"
        } else {
            "--rsi-var"
        }
    }

    pub fn rsi_model(&self) -> RsiModel {
        match self.kr {
            Some(k) => RsiModel::Coefficient(k),
            None => RsiModel::Variance(self.rsi_var.unwrap_or(DEFAULT_RSI_VARIANCE)),
        }
    }

    fn channel(&self) -> Result<ChannelParams, UsageError> {
        let w = match self.omega.as_deref() {
            None => [1.0; 4],
            Some([w]) => [*w; 4],
            Some([a, b, c, d]) => [*a, *b, *c, *d],
            Some(other) => {
                return Err(usage(
                    "--omega",
                    format!(
                        "expected 1 or 4 comma-separated values, got {}",
                        other.len()
                    ),
                ));
            }
        };
        ChannelParams::new(w[0], w[1], w[2], w[3]).map_err(|e| usage("--omega", e.to_string()))
    }

    fn flag_for(&self, field: &str) -> &'static str {
        match field {
            "p_s" => self.source_flag(),
            "p_r" => self.relay_flag(),
            "sigma2" => "--sigma2",
            "k_r" => self.rsi_flag(),
            "r0" => "--r0",
            _ => "--omega",
        }
    }

    /// The configuration these flags describe, before any sweep override.
    pub fn config(&self) -> Result<SystemConfig, UsageError> {
        let p_s = self
            .ps
            .unwrap_or_else(|| db_to_linear(self.ps_db.unwrap_or(DEFAULT_POWER_DB)));
        let p_r = self
            .pr
            .unwrap_or_else(|| db_to_linear(self.pr_db.unwrap_or(DEFAULT_POWER_DB)));
        if let Some(v) = self.rsi_var {
            if !(v.is_finite() && v >= 0.0) {
                return Err(usage(
                    "--rsi-var",
                    format!("{v} (RSI variance must be nonnegative and finite)"),
                ));
            }
        }
        let k_r = match self.rsi_model() {
            RsiModel::Coefficient(k) => k,
            RsiModel::Variance(v) => v / p_r,
        };
        let config = SystemConfig {
            p_s,
            p_r,
            sigma2: self.sigma2,
            k_r,
            r0: self.r0,
            channel: self.channel()?,
        };
        self.check(&config)?;
        Ok(config)
    }

    pub fn check(&self, config: &SystemConfig) -> Result<(), UsageError> {
        config.validate().map_err(|e| match &e {
            hdfd::Error::InvalidConfig { field, .. } => usage(self.flag_for(field), e.to_string()),
            _ => usage("--omega", e.to_string()),
        })
    }
}

impl SweepArgs {
    pub fn spec(&self) -> Result<SweepSpec, UsageError> {
        let base = self.system.config()?;
        let variable: SweepVariable = self.var.into();
        let preset = presets::all()
            .into_iter()
            .map(|(_, s)| s)
            .find(|s| s.variable == variable)
            .expect("every sweep variable has a preset grid");
        let spec = SweepSpec {
            variable,
            start: self.from.unwrap_or(preset.start),
            stop: self.to.unwrap_or(preset.stop),
            step: self.step.unwrap_or(preset.step),
            base,
            rsi: self.system.rsi_model(),
            mc_samples: self.mc,
            seed: self.seed,
            schemes: self.schemes.clone(),
        };
        if !(spec.step.is_finite() && spec.step > 0.0) {
            return Err(usage("--step", format!("{} (must be positive)", spec.step)));
        }
        if !(spec.start.is_finite() && spec.stop.is_finite() && spec.start <= spec.stop) {
            return Err(usage(
                "--to",
                format!("range {}..{} is empty", spec.start, spec.stop),
            ));
        }
        if spec.grid().len() > 1_000_000 {
            return Err(usage("--step", "grid has more than 10^6 points"));
        }
        // Every grid point must be a valid configuration before anything runs.
        for value in [
            spec.start,
            spec.grid().last().copied().unwrap_or(spec.start),
        ] {
            let c = spec.config_at(value);
            c.validate().map_err(|e| {
                let flag = match (variable, &e) {
                    (SweepVariable::R0, hdfd::Error::InvalidConfig { field: "r0", .. }) => "--from",
                    (_, hdfd::Error::InvalidConfig { field, .. }) => self.system.flag_for(field),
                    _ => "--var",
                };
                usage(flag, e.to_string())
            })?;
        }
        Ok(spec)
    }
}
