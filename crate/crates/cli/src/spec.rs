//! Command-line arguments, parameter resolution and sweep axes.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use ratcap_core::{NetworkParams, RateLogBase, SimConfig};
use serde::{Deserialize, Serialize};

use crate::output::Format;
use crate::CliError;

/// Default scenario: `R = 1`, `beta = 3`, `alpha = 3`, `lambda = 0.1`,
/// `SNR = 10`, `rho = 1`.
pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_ALPHA: f64 = 3.0;
pub const DEFAULT_BETA: f64 = 3.0;
pub const DEFAULT_R: f64 = 1.0;
pub const DEFAULT_RHO: f64 = 1.0;
pub const DEFAULT_SNR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Unlimited-attempt bound, optimal hop count and limits.
    Analytic,
    /// Exact capacity for a finite attempt budget `--A`.
    Exact,
    /// Monte Carlo estimate of the finite-budget table, checked against the exact values.
    Simulate,
    /// Dataset behind one of the seven standard plots (`--figure`).
    Figure,
    /// Grid checks of the binomial identities and the hop-count solvers.
    Verify,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "ratcap",
    version,
    about = "Random access transport capacity of multihop networks with a finite attempt budget"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// Transmitter density (nodes per unit area).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Path-loss exponent, > 2.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// SINR threshold.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Source-destination distance.
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// Transmit power at unit distance.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Noise power.
    #[arg(long, conflicts_with = "snr")]
    pub eta: Option<f64>,
    /// End-to-end SNR, linear (`rho R^-alpha / eta`); `inf` for no noise.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Logarithm base of the spectral efficiency.
    #[arg(long, value_parser = parse_log_base)]
    pub log_base: Option<RateLogBase>,
    /// Attempt budget.
    #[arg(long = "A")]
    pub a: Option<u64>,
    /// Hop count.
    #[arg(long = "M")]
    pub m: Option<u64>,
    /// Monte Carlo trials per row.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sweep axis `<var>=<spec>`: var is lambda, alpha, beta, R, rho, eta or A;
    /// spec is `logrange(a,b,n)`, `linrange(a,b,n)` or a comma list.
    #[arg(long)]
    pub sweep: Option<String>,
    /// JSON file with any of the fields lambda, alpha, beta, R, rho, eta, rate_log_base.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Figure number, 1 to 7.
    #[arg(long)]
    pub figure: Option<u8>,
    /// Shift `p` on the right-hand sides of the identity checks (negative control).
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub perturb_p: f64,
}

fn parse_log_base(s: &str) -> Result<RateLogBase, String> {
    s.parse().map_err(|e: ratcap_core::Error| e.to_string())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub rate_log_base: Option<RateLogBase>,
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flags override the config file, which overrides the defaults. The noise
/// power is `eta` if given, otherwise derived from `--snr` (default 10).
pub fn resolve_params(cli: &Cli, file: &ConfigFile) -> Result<NetworkParams, CliError> {
    let lambda = cli.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA);
    let alpha = cli.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    let beta = cli.beta.or(file.beta).unwrap_or(DEFAULT_BETA);
    let big_r = cli.big_r.or(file.big_r).unwrap_or(DEFAULT_R);
    let rho = cli.rho.or(file.rho).unwrap_or(DEFAULT_RHO);
    let base = cli.log_base.or(file.rate_log_base).unwrap_or_default();
    let params = match (cli.eta, cli.snr, file.eta) {
        (Some(eta), _, _) => NetworkParams::new(lambda, alpha, beta, big_r, rho, eta),
        (None, Some(snr), _) => NetworkParams::with_snr(lambda, alpha, beta, big_r, rho, snr),
        (None, None, Some(eta)) => NetworkParams::new(lambda, alpha, beta, big_r, rho, eta),
        (None, None, None) => NetworkParams::with_snr(lambda, alpha, beta, big_r, rho, DEFAULT_SNR),
    }?;
    Ok(params.with_log_base(base))
}

pub const SWEEP_VARIABLES: [&str; 7] = ["lambda", "alpha", "beta", "R", "rho", "eta", "A"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub variable: String,
    pub spec: String,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn is_budget(&self) -> bool {
        self.variable == "A"
    }
}

pub fn parse_sweep(text: &str) -> Result<Sweep, CliError> {
    let (var, spec) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("sweep `{text}` must look like <var>=<spec>")))?;
    let var = var.trim();
    if !SWEEP_VARIABLES.contains(&var) {
        return Err(CliError::Usage(format!(
            "sweep variable `{var}` must be one of {}",
            SWEEP_VARIABLES.join(", ")
        )));
    }
    let values = parse_axis(spec.trim())?;
    if var == "A" {
        if let Some(bad) = values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
            return Err(CliError::Usage(format!("sweep over A needs integers >= 1, got {bad}")));
        }
    }
    Ok(Sweep {
        variable: var.to_string(),
        spec: spec.trim().to_string(),
        values,
    })
}

/// `logrange(a,b,n)`, `linrange(a,b,n)` (both endpoints included) or `v1,v2,...`.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad sweep spec `{spec}`: {why}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("`{}` is not a number", s.trim())))
    };
    if let Some((name, rest)) = spec.split_once('(') {
        let inner = rest.strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
        let args: Vec<&str> = inner.split(',').collect();
        if args.len() != 3 {
            return Err(bad("expected three arguments (start, stop, count)"));
        }
        let (a, b) = (num(args[0])?, num(args[1])?);
        let n: usize = args[2]
            .trim()
            .parse()
            .map_err(|_| bad("count must be a positive integer"))?;
        if n == 0 {
            return Err(bad("count must be a positive integer"));
        }
        let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        match name.trim() {
            "logrange" => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(bad("logrange endpoints must be > 0"));
                }
                let (la, lb) = (a.log10(), b.log10());
                Ok((0..n)
                    .map(|i| {
                        if i + 1 == n && n > 1 {
                            b
                        } else {
                            10f64.powf(la + (lb - la) * t(i))
                        }
                    })
                    .collect())
            }
            "linrange" if n == 1 => Ok(vec![a]),
            // weighted form keeps integer grids exact
            "linrange" => Ok((0..n)
                .map(|i| (a * (n - 1 - i) as f64 + b * i as f64) / (n - 1) as f64)
                .collect()),
            other => Err(bad(&format!("unknown range function `{other}`"))),
        }
    } else {
        let values = spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(bad("empty list"));
        }
        Ok(values)
    }
}

/// One evaluation point of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub params: NetworkParams,
    pub a: Option<u64>,
}

pub fn sweep_points(base: &NetworkParams, a: Option<u64>, sweep: Option<&Sweep>) -> Result<Vec<Point>, CliError> {
    let Some(sweep) = sweep else {
        return Ok(vec![Point { params: *base, a }]);
    };
    sweep
        .values
        .iter()
        .map(|&v| {
            if sweep.is_budget() {
                Ok(Point {
                    params: *base,
                    a: Some(v as u64),
                })
            } else {
                Ok(Point {
                    params: base.set(&sweep.variable, v)?,
                    a,
                })
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything that determines a run; serialized into the CSV metadata line.
#[derive(Debug, Clone, Serialize)]
pub struct RunSpec {
    pub command: Command,
    pub params: NetworkParams,
    #[serde(rename = "A")]
    pub a: Option<u64>,
    #[serde(rename = "M")]
    pub m: Option<u64>,
    pub sweep: Option<Sweep>,
    pub output: OutputSpec,
    pub sim: Option<SimConfig>,
    pub figure: Option<u8>,
    /// Fixed settings a figure uses beyond `params`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<serde_json::Value>,
}

impl RunSpec {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let params = resolve_params(cli, &file)?;
        let sweep = cli.sweep.as_deref().map(parse_sweep).transpose()?;
        if cli.a == Some(0) {
            return Err(CliError::Usage("--A must be at least 1".into()));
        }
        if cli.m == Some(0) {
            return Err(CliError::Usage("--M must be at least 1".into()));
        }
        let sim = if cli.command == Command::Simulate {
            let d = SimConfig::default();
            Some(SimConfig::new(
                cli.trials.unwrap_or(d.trials),
                cli.seed.unwrap_or(d.seed),
            )?)
        } else {
            None
        };
        Ok(RunSpec {
            command: cli.command,
            params,
            a: cli.a,
            m: cli.m,
            sweep,
            output: OutputSpec {
                path: cli.out.clone(),
                format: cli.format,
            },
            sim,
            figure: cli.figure,
            profile: None,
        })
    }
}
