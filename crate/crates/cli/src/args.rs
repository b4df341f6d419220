use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// Weighted Lorentz norms, weight conditions and Fourier-coefficient inequalities.
#[derive(Debug, Parser)]
#[command(name = "lorentz", version)]
pub struct Cli {
    /// TOML file with default values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write the report's table as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by all commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Common {
    /// Lower end of the parameter grid.
    #[arg(long, global = true)]
    pub t_min: Option<f64>,
    /// Upper end of the parameter grid.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Grid points per decade (at least 8).
    #[arg(long, global = true)]
    pub density: Option<usize>,
    /// Truncation radius for Fourier coefficients.
    #[arg(long = "n-max", alias = "N", global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Λ, Γ and Θ norms of a step function.
    Norm(NormArgs),
    /// Level function of a weight.
    Level(LevelArgs),
    /// Kernel-section bracket for a cone ratio.
    Cone(ConeArgs),
    /// Weight conditions.
    Condition {
        #[command(subcommand)]
        which: ConditionCmd,
    },
    /// Build a test function and check its coefficient bound.
    Testfun(TestfunArgs),
    /// Empirical Fourier-inequality ratios against the condition bounds.
    Verify(VerifyArgs),
    /// Jodeit–Torchinsky inequality with constant 8.
    JtCheck(JtArgs),
}

#[derive(Debug, Clone, Subcommand)]
pub enum ConditionCmd {
    Cxy(ConditionArgs),
    Comega(ConditionArgs),
    Nolevel(ConditionArgs),
    Bhc(ConditionArgs),
    HardyDual(ConditionArgs),
    Llogl(ConditionArgs),
    Lz(ConditionArgs),
}

impl ConditionCmd {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cxy(_) => "cxy",
            Self::Comega(_) => "comega",
            Self::Nolevel(_) => "nolevel",
            Self::Bhc(_) => "bhc",
            Self::HardyDual(_) => "hardy-dual",
            Self::Llogl(_) => "llogl",
            Self::Lz(_) => "lz",
        }
    }

    pub fn args(&self) -> &ConditionArgs {
        match self {
            Self::Cxy(a) | Self::Comega(a) | Self::Nolevel(a) | Self::Bhc(a) | Self::HardyDual(a) | Self::Llogl(a) | Self::Lz(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct NormArgs {
    /// Cells as `length:value` pairs from 0, e.g. "0.5:2,1:1".
    #[arg(long)]
    pub cells: Option<String>,
    /// Weight expression.
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct LevelArgs {
    #[arg(long)]
    pub u: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ConeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Averaging intervals "a1,b1;a2,b2" (default: identity).
    #[arg(long)]
    pub averaging: Option<String>,
    /// Random cone elements to compare against the bracket.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ConditionArgs {
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct TestfunArgs {
    #[arg(long)]
    pub z: Option<f64>,
    /// Averaging intervals "a1,b1;a2,b2" (default: identity).
    #[arg(long)]
    pub averaging: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest integer `y` at which the bound is checked.
    #[arg(long)]
    pub y_max: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct VerifyArgs {
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// gamma-gamma, gamma-lambda or lambda-lambda.
    #[arg(long)]
    pub kind: Option<String>,
    /// e.g. "random:100+adversarial".
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct JtArgs {
    /// Pieces "x0,x1,amp,freq,phase;..." (phase optional).
    #[arg(long)]
    pub pieces: Option<String>,
    /// Check this many seeded random functions instead.
    #[arg(long)]
    pub random: Option<usize>,
    /// Comma-separated `z` values (default 1, 2, 4, …, 4096).
    #[arg(long)]
    pub z: Option<String>,
}
