//! Argument parsing and command dispatch.

use std::path::PathBuf;
use std::str::FromStr;

use casimir_core::basis::BasisSpec;
use casimir_core::force::{casimir_force, convergence_scan};
use casimir_core::loops::{dominant_loops, LoopLimits};
use casimir_core::scattering::{z_integrand, ScatteringMode};
use casimir_core::units::HBAR_C_PER_UM2_IN_NEWTON;
use casimir_core::CasimirError;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{read_config, ConfigError, Format, RunConfig};
use crate::output::{ConvergenceRecord, ForceRecord, LoopRecord, Report, VERSION};

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Casimir forces between spheres by multiple scattering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Force on the target sphere.
    Force {
        #[command(flatten)]
        common: Common,
    },
    /// Force integrand dF/dκ on a κ grid.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Linear grid MIN:MAX:COUNT in μm⁻¹.
        #[arg(long)]
        kappa_grid: KappaGrid,
    },
    /// Force over a grid of truncation orders and scattering modes.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated L_max values.
        #[arg(long, value_delimiter = ',', required = true)]
        lmax_list: Vec<usize>,
        /// Comma-separated modes; defaults to the configured mode.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<ScatteringMode>,
    },
    /// Heaviest scattering loops through the target.
    Loops {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// μm⁻¹; defaults to the inverse smallest center distance.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = LoopLimits::default().max_hops)]
        max_hops: usize,
        /// Loops with κ·L above this are dropped.
        #[arg(long, default_value_t = LoopLimits::default().max_kappa_length)]
        max_kappa_length: f64,
    },
}

/// Flags shared by all commands. They override the config file.
#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub target: Option<usize>,
    #[arg(long)]
    pub lmax: Option<usize>,
    /// `closed` or `reflection:K`.
    #[arg(long)]
    pub mode: Option<ScatteringMode>,
    /// Kelvin.
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report forces in newtons instead of ħc/μm².
    #[arg(long)]
    pub newton: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for KappaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("expected MIN:MAX:COUNT, got `{s}`"));
        };
        let min: f64 = min.trim().parse().map_err(|_| format!("bad MIN `{min}`"))?;
        let max: f64 = max.trim().parse().map_err(|_| format!("bad MAX `{max}`"))?;
        let count: usize = count.trim().parse().map_err(|_| format!("bad COUNT `{count}`"))?;
        if !(min > 0.0 && max >= min && max.is_finite()) || count == 0 {
            return Err(format!("need 0 < MIN <= MAX and COUNT >= 1, got `{s}`"));
        }
        if count > 1 && max == min {
            return Err("MIN == MAX needs COUNT = 1".into());
        }
        Ok(Self { min, max, count })
    }
}

impl KappaGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(CasimirError),
    #[error("{0}")]
    Numerical(CasimirError),
    #[error("{0}")]
    Io(String),
}

impl From<CasimirError> for CliError {
    fn from(e: CasimirError) -> Self {
        if e.is_non_convergence() {
            CliError::Numerical(e)
        } else {
            CliError::Input(e)
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'static str,
    exit_code: i32,
    message: String,
    violations: &'a [String],
}

#[derive(Serialize)]
struct ErrorObject<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) | CliError::Input(_) => "config",
            CliError::Numerical(_) => "non_convergence",
            CliError::Io(_) => "io",
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        let violations: &[String] = match self {
            CliError::Config(e) => &e.violations,
            _ => &[],
        };
        let body = ErrorBody { kind: self.kind(), exit_code: self.exit_code(), message: self.to_string(), violations };
        serde_json::to_string(&ErrorObject { error: body }).expect("error serializes")
    }
}

/// A finished command: the report plus where and how to write it.
pub struct Outcome {
    pub report: Report,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Common {
    /// Loads the config file and applies the flag overrides, then validates.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut rc = read_config(&self.config)?;
        if let Some(t) = self.target {
            rc.target = t;
        }
        if let Some(l) = self.lmax {
            rc.lmax = Some(l);
        }
        if let Some(m) = self.mode {
            rc.mode = m;
        }
        if let Some(t) = self.temperature {
            rc.temperature = t;
        }
        if let Some(f) = self.format {
            rc.output.format = f;
        }
        if let Some(p) = &self.out {
            rc.output.path = Some(p.clone());
        }
        rc.validate()?;
        Ok(rc)
    }
}

/// Reporting units for forces.
#[derive(Debug, Clone, Copy, Default)]
pub struct Units {
    pub newton: bool,
}

impl Units {
    fn force(self) -> (&'static str, f64) {
        if self.newton {
            ("N", HBAR_C_PER_UM2_IN_NEWTON)
        } else {
            ("hbar_c/um^2", 1.0)
        }
    }

    /// Force per unit κ.
    fn integrand(self) -> (&'static str, f64) {
        if self.newton {
            ("N*um", HBAR_C_PER_UM2_IN_NEWTON)
        } else {
            ("hbar_c/um", 1.0)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let common = match &cli.command {
        Command::Force { common }
        | Command::Spectrum { common, .. }
        | Command::Convergence { common, .. }
        | Command::Loops { common, .. } => common,
    };
    let rc = common.resolve()?;
    let units = Units { newton: common.newton };
    let report = match &cli.command {
        Command::Force { .. } => cmd_force(&rc, units)?,
        Command::Spectrum { kappa_grid, .. } => cmd_spectrum(&rc, units, *kappa_grid)?,
        Command::Convergence { lmax_list, orders, .. } => cmd_convergence(&rc, units, lmax_list, orders)?,
        Command::Loops { top_k, kappa, max_hops, max_kappa_length, .. } => {
            let limits = LoopLimits { max_hops: *max_hops, max_kappa_length: *max_kappa_length };
            cmd_loops(&rc, *kappa, *top_k, limits)?
        }
    };
    Ok(Outcome { report, format: rc.output.format, out: rc.output.path })
}

pub fn cmd_force(rc: &RunConfig, units: Units) -> Result<Report, CliError> {
    let config = rc.configuration();
    let basis = rc.basis(&config);
    let r = casimir_force(&config, rc.target, basis, rc.mode, rc.thermal(), rc.quadrature_spec())?;
    eprintln!(
        "casimir force: {} evaluations, L_max {}, {} in {:.2} s",
        r.evaluations, r.lmax, r.mode, r.wall_time_s
    );
    let (unit, scale) = units.force();
    Ok(Report::Force(vec![ForceRecord {
        kappa: None,
        fx: r.force[0] * scale,
        fy: r.force[1] * scale,
        fz: r.force[2] * scale,
        error_estimate: Some(r.error_estimate * scale),
        lmax: r.lmax,
        mode: r.mode.to_string(),
        target: r.target,
        temperature: r.temperature,
        unit,
        evaluations: Some(r.evaluations),
        config_hash: rc.hash(),
        version: VERSION,
    }]))
}

/// Rows of `dF/dκ = z(κ)/2π`, which integrate over κ to the T = 0 force.
pub fn cmd_spectrum(rc: &RunConfig, units: Units, grid: KappaGrid) -> Result<Report, CliError> {
    let config = rc.configuration();
    let basis = rc.basis(&config);
    let hash = rc.hash();
    let (unit, scale) = units.integrand();
    let scale = scale / (2.0 * std::f64::consts::PI);
    let mut rows = Vec::with_capacity(grid.count);
    for kappa in grid.points() {
        let z = z_integrand(&config, rc.target, kappa, basis, rc.mode)?;
        rows.push(ForceRecord {
            kappa: Some(kappa),
            fx: z.value[0] * scale,
            fy: z.value[1] * scale,
            fz: z.value[2] * scale,
            error_estimate: None,
            lmax: basis.lmax(),
            mode: rc.mode.to_string(),
            target: rc.target,
            temperature: rc.temperature,
            unit,
            evaluations: None,
            config_hash: hash.clone(),
            version: VERSION,
        });
    }
    Ok(Report::Spectrum(rows))
}

pub fn cmd_convergence(
    rc: &RunConfig,
    units: Units,
    lmax_list: &[usize],
    orders: &[ScatteringMode],
) -> Result<Report, CliError> {
    for &l in lmax_list {
        BasisSpec::new(l).map_err(|e| CliError::Usage(format!("--lmax-list: {e}")))?;
    }
    let modes = if orders.is_empty() { vec![rc.mode] } else { orders.to_vec() };
    let config = rc.configuration();
    let rows = convergence_scan(&config, rc.target, lmax_list, &modes, rc.thermal(), rc.quadrature_spec())?;
    let hash = rc.hash();
    let (unit, scale) = units.force();
    Ok(Report::Convergence(
        rows.into_iter()
            .map(|r| ConvergenceRecord {
                lmax: r.lmax,
                mode: r.mode.to_string(),
                fx: r.force[0] * scale,
                fy: r.force[1] * scale,
                fz: r.force[2] * scale,
                difference: r.difference.map(|d| d * scale),
                target: rc.target,
                temperature: rc.temperature,
                unit,
                config_hash: hash.clone(),
                version: VERSION,
            })
            .collect(),
    ))
}

pub fn cmd_loops(rc: &RunConfig, kappa: Option<f64>, top_k: usize, limits: LoopLimits) -> Result<Report, CliError> {
    let config = rc.configuration();
    let kappa = kappa.unwrap_or_else(|| config.min_center_distance().map_or(1.0, |d| 1.0 / d));
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(CliError::Usage(format!("--kappa must be positive, got {kappa}")));
    }
    let hash = rc.hash();
    let loops = dominant_loops(&config, rc.target, kappa, top_k, limits);
    Ok(Report::Loops(
        loops
            .into_iter()
            .enumerate()
            .map(|(i, (lp, weight))| LoopRecord {
                rank: i + 1,
                sequence: lp.sequence.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-"),
                hop_count: lp.hop_count,
                total_length: lp.total_length,
                winding: lp.winding,
                weight,
                kappa,
                target: rc.target,
                config_hash: hash.clone(),
                version: VERSION,
            })
            .collect(),
    ))
}
