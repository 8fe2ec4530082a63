//! Command-line surface.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use qentropy::{Branch, ConstraintKind, EntropyKind};

/// Environment variable overriding the solver iteration cap.
pub const MAX_ITER_ENV: &str = "QENTROPY_MAX_ITER";

/// A validated invocation.
#[derive(Debug, Clone, Parser)]
#[command(name = "qentropy", version, about = "Hybrid entropy, MaxEnt distributions and multifractal spectra")]
pub struct RunConfig {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate entropies of a distribution.
    Entropy(EntropyArgs),
    /// Solve a MaxEnt problem.
    Maxent(MaxentArgs),
    /// High- or low-temperature closed forms.
    Asymptote(AsymptoteArgs),
    /// Monte Carlo Schur-concavity probe.
    Probe(ProbeArgs),
    /// Roots of the two-event stationarity function.
    PsiRoots(PsiArgs),
    /// Multifractal spectrum of a sample.
    Mfa(MfaArgs),
    /// Lambert W on one branch.
    W(WArgs),
    /// Run the invariant battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Shannon,
    Renyi,
    Thc,
    Hybrid,
    All,
}

impl KindArg {
    pub fn kinds(self) -> Vec<EntropyKind> {
        match self {
            KindArg::Shannon => vec![EntropyKind::Shannon],
            KindArg::Renyi => vec![EntropyKind::Renyi],
            KindArg::Thc => vec![EntropyKind::Thc],
            KindArg::Hybrid => vec![EntropyKind::Hybrid],
            KindArg::All => EntropyKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Shannon,
    Renyi,
    Thc,
    Hybrid,
}

impl From<ProbeKind> for EntropyKind {
    fn from(k: ProbeKind) -> Self {
        match k {
            ProbeKind::Shannon => EntropyKind::Shannon,
            ProbeKind::Renyi => EntropyKind::Renyi,
            ProbeKind::Thc => EntropyKind::Thc,
            ProbeKind::Hybrid => EntropyKind::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Escort,
    Linear,
}

impl From<ConstraintArg> for ConstraintKind {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::Escort => ConstraintKind::Escort,
            ConstraintArg::Linear => ConstraintKind::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegmentArg {
    Interior,
    NearBoundary,
}

fn parse_order(s: &str) -> Result<f64, String> {
    let q: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if q > 0.0 && q.is_finite() {
        Ok(q)
    } else {
        Err(format!("q must be finite and > 0, got {s}"))
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a number > 0, got {s}"))
    }
}

fn parse_damping(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("damping must lie in (0, 1], got {s}"))
    }
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("eps must lie in (0, 1), got {s}"))
    }
}

fn parse_branch(s: &str) -> Result<Branch, String> {
    match s {
        "0" => Ok(Branch::Principal),
        "-1" => Ok(Branch::MinusOne),
        _ => Err(format!("branch must be 0 or -1, got {s}")),
    }
}

fn parse_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n >= 2 {
        Ok(n)
    } else {
        Err(format!("n must be at least 2, got {s}"))
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["probs", "input"])))]
pub struct EntropyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub kind: KindArg,
    #[arg(long, value_parser = parse_order, allow_negative_numbers = true)]
    pub q: f64,
    /// Comma-separated probabilities.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub probs: Option<Vec<f64>>,
    /// CSV file with one probability per line.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Allow the hybrid entropy below q = 1/2.
    #[arg(long)]
    pub relaxed: bool,
    /// Also report the entropy inequality chain.
    #[arg(long)]
    pub chain: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MaxentArgs {
    #[arg(long, value_enum)]
    pub constraint: ConstraintArg,
    #[arg(long, value_parser = parse_order, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub omega: f64,
    /// CSV file with one energy level per line.
    #[arg(long, value_name = "FILE")]
    pub energies: PathBuf,
    #[arg(long, value_parser = parse_branch, allow_negative_numbers = true, default_value = "0")]
    pub branch: Branch,
    #[arg(long, value_parser = parse_damping)]
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoteArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long, value_enum)]
    pub constraint: ConstraintArg,
    #[arg(long, value_parser = parse_order, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub omega: f64,
    /// Supplied `κ`; energies are then read as offsets from the mean.
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, requires = "phi")]
    pub kappa: Option<f64>,
    /// Supplied `Φ`.
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, requires = "kappa")]
    pub phi: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub energies: PathBuf,
    #[arg(long, value_parser = parse_branch, allow_negative_numbers = true, default_value = "0")]
    pub branch: Branch,
    /// Levels with `|ΔE|` below this are interpolated in the low regime.
    #[arg(long, value_parser = parse_finite, default_value_t = 0.0)]
    pub exclusion: f64,
    /// Write the distribution as a TSV grid.
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub entropy: ProbeKind,
    #[arg(long, value_parser = parse_order, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_parser = parse_n)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Also run the midpoint concavity check of `exp(−⟨ln P⟩_q)`.
    #[arg(long, value_enum)]
    pub segments: Option<SegmentArg>,
    /// Write the two-event curve `(p, f(p, 1 − p))` as TSV.
    #[arg(long, value_name = "FILE")]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 1001)]
    pub curve_points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PsiArgs {
    #[arg(long, value_parser = parse_order, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_parser = parse_positive, default_value_t = 1e-6)]
    pub y_min: f64,
    #[arg(long, value_parser = parse_positive, default_value_t = 1e6)]
    pub y_max: f64,
    #[arg(long, default_value_t = qentropy::majorization::PSI_GRID_POINTS)]
    pub grid_points: usize,
    /// Write `Ψ_q(y)` on a log grid as TSV.
    #[arg(long, value_name = "FILE")]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 401)]
    pub curve_points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MfaArgs {
    /// CSV of coordinates in [0, 1], optionally followed by a weight column.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Read the last column as a weight.
    #[arg(long)]
    pub weighted: bool,
    /// Comma-separated box sizes.
    #[arg(long, value_delimiter = ',', value_parser = parse_eps, required = true)]
    pub eps_list: Vec<f64>,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, default_value_t = -5.0)]
    pub q_min: f64,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, default_value_t = 5.0)]
    pub q_max: f64,
    #[arg(long, value_parser = parse_positive, default_value_t = 0.1)]
    pub q_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct WArgs {
    #[arg(long, value_parser = parse_branch, allow_negative_numbers = true, default_value = "0")]
    pub branch: Branch,
    #[arg(value_parser = parse_finite, allow_negative_numbers = true)]
    pub x: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only checks whose group or name contains this string.
    #[arg(long)]
    pub filter: Option<String>,
    /// Tighten every tolerance to zero (negative control).
    #[arg(long)]
    pub inject_fault: bool,
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}
