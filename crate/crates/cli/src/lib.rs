//! Command-line front end for the `pseudonorm` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod commands;
pub mod config;
pub mod grid;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pseudonorm::asymptotics::LevelOrder;
use pseudonorm::potential::AssumptionMode;

use crate::grid::Grid;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "pseudonorm", version, about = "Resolvent norms of Schrödinger operators with complex potentials")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Persistent cache of Airy reference norms.
    #[arg(long, global = true, env = "PSEUDONORM_CACHE")]
    pub cache: Option<PathBuf>,
    /// JSON file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Evaluate asymptotics even when the potential fails its assumption checks.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Potential, e.g. `monomial:n=2`, `power:p=0.5@half`, `table:v.csv`.
    #[arg(long)]
    pub potential: Option<String>,
    /// `imag` (λ = a + ib, parameter b) or `real` (λ = a + ib, parameter a).
    #[arg(long)]
    pub axis: Option<String>,
    /// Offset from the axis, e.g. `0.5*param^0.3333*(log(param))^0.6667`.
    #[arg(long)]
    pub curve: Option<String>,
    /// Parameter grid `start:stop:count:log|lin`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Relative tolerance of numerical resolvent norms.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Finite-difference stencil, `fd2` or `fd4`.
    #[arg(long)]
    pub stencil: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AiryKindArg {
    Rotated,
    Generalized,
}

/// Which engines a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Norm,
    Asym,
    Both,
}

impl std::fmt::Display for SweepMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Norm => "norm",
            Self::Asym => "asym",
            Self::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    AiryConstants,
    Oracles,
    DaviesImagTrend,
    DaviesRealTrend,
    LevelRoundTrip,
    InverseAlpha1,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numerical resolvent norm at given spectral parameters.
    Norm {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Spectral parameter `re,im`; repeatable.
        #[arg(long, required = true, allow_hyphen_values = true)]
        lambda: Vec<String>,
    },
    /// Asymptotic resolvent norm along an axis or curve.
    Asym {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Exponent slack in the real-axis remainder (default min(β,1)/10).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Numerical and asymptotic norms side by side over a grid.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value_t = SweepMode::Both)]
        mode: SweepMode,
    },
    /// Level curves `‖(H-λ)⁻¹‖ = 1/ε` and critical boundaries.
    Levels {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Levels ε, comma separated.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Slack ε' of the critical boundary.
        #[arg(long)]
        eps_prime: Option<f64>,
        /// `leading` closed form or `lambert` fixed point.
        #[arg(long)]
        order: Option<LevelOrder>,
    },
    /// Airy reference norms ‖(A - μ)⁻¹‖ over a μ grid.
    Airy {
        #[arg(long, value_enum, default_value_t = AiryKindArg::Rotated)]
        kind: AiryKindArg,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Rotation angle in radians (default π/2).
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// μ grid `start:stop:count:log|lin`.
        #[arg(long, default_value = "0:0:1:lin")]
        grid: Grid,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Potential realising a prescribed resolvent-norm rate.
    Inverse {
        /// Rate, e.g. `japanese:alpha=1`, `exp:alpha=0.5`, `const:c=2`.
        #[arg(long)]
        rate: String,
        #[arg(long, default_value_t = 1e8)]
        x_max: f64,
        #[arg(long, default_value_t = 50)]
        points_per_decade: usize,
        /// Values of b at which to verify the achieved rate.
        #[arg(long, value_delimiter = ',')]
        verify: Vec<f64>,
    },
    /// Built-in verification scenarios; exit code is the number of failures.
    Verify {
        #[arg(long, value_enum, default_value_t = Scenario::All)]
        scenario: Scenario,
    },
    /// Sampled assumption report for a potential or a rate function.
    Check {
        #[command(flatten)]
        problem: ProblemArgs,
        /// `iR` (imaginary axis) or `R` (real axis).
        #[arg(long, default_value = "iR")]
        mode: AssumptionMode,
        #[arg(long, default_value_t = 1e8)]
        horizon: f64,
        /// Check a rate function instead of a potential.
        #[arg(long, conflicts_with = "potential")]
        rate: Option<String>,
    },
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> anyhow::Result<u8> {
    commands::dispatch(cli)
}
