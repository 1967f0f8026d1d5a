//! Command-line surface. Flags override config-file values, which override
//! the per-command defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConventionKind, Format, GridKind, MeanKind, NoiseKind, SweepParam, SystemKind};

#[derive(Debug, Parser)]
#[command(
    name = "bloch",
    version,
    about = "Dissipative and stochastic qubit dynamics with geometric phases",
    after_help = "Set BLOCH_LOG (error|warn|info|debug|trace) to control diagnostics on stderr."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Table format; scalar reports are always JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a trajectory and export t, I, phi, r^2, H, and the Bloch
    /// vector.
    Sim(SimArgs),
    /// One geometric-phase value for the damped cycle.
    #[command(subcommand)]
    Gp(GpCommand),
    /// Thermal factor f and phase over a log temperature grid.
    GpThermal(ThermalArgs),
    /// Monte Carlo estimate of the thermal phase.
    GpMc(McArgs),
    /// Interference intensity of the damped qubit against a reference.
    Interf(InterfArgs),
    /// Closed-form phase swept over one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum GpCommand {
    /// Closed form.
    Closed(GpArgs),
    /// Adaptive quadrature of the connection integral.
    Quad(GpArgs),
    /// First-order weak-coupling series.
    Series(GpArgs),
}

#[derive(Debug, Args)]
pub struct GpArgs {
    /// Damping strength (default 0).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Half level splitting (default 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Launch polar angle (default pi/2).
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Cycle reading for the quadrature.
    #[arg(long, value_enum)]
    pub convention: Option<ConventionKind>,
    /// Report closed form and quadrature side by side with their gap.
    #[arg(long)]
    pub cross_check: bool,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Initial action (default 0.5).
    #[arg(long)]
    pub i0: Option<f64>,
    /// Initial angle (default 0).
    #[arg(long)]
    pub phi0: Option<f64>,
    /// Damping strength (default 0).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Half level splitting (default 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Run length (default 2 pi).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Step size (default 1e-3).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Keep every n-th step (default 10).
    #[arg(long)]
    pub stride: Option<usize>,
    /// Full equations or the closed-form qubit path.
    #[arg(long, value_enum)]
    pub system: Option<SystemKind>,
    /// Noise model (default none).
    #[arg(long, value_enum)]
    pub noise: Option<NoiseKind>,
    /// Inverse temperature for the noise (default 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Noise mean convention (default zero).
    #[arg(long, value_enum)]
    pub noise_mean: Option<MeanKind>,
    /// Redraw interval of stepwise noise (default 0.1).
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ThermalArgs {
    /// Launch polar angle (default 0).
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Lowest temperature (default 0.01).
    #[arg(long)]
    pub t_start: Option<f64>,
    /// Highest temperature (default 1000).
    #[arg(long)]
    pub t_stop: Option<f64>,
    /// Grid points (default 50).
    #[arg(long)]
    pub points: Option<usize>,
    /// Append the log-log fit of f(T) with its plateau crossover.
    #[arg(long)]
    pub fit: bool,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Inverse temperature (default 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Launch polar angle (default 0).
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Sample count, at least 100 (default 100000).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InterfArgs {
    /// Initial action (default 0).
    #[arg(long)]
    pub i0: Option<f64>,
    /// Initial angle (default 0).
    #[arg(long)]
    pub phi0: Option<f64>,
    /// Damping strength (default 0).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Half level splitting (default 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Time span (default 4 pi).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Grid points (default 1001).
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Which parameter to sweep.
    #[arg(long, value_enum)]
    pub param: Option<SweepParam>,
    /// Grid spacing (default linear).
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// First swept value.
    #[arg(long)]
    pub start: Option<f64>,
    /// Last swept value.
    #[arg(long)]
    pub stop: Option<f64>,
    /// Grid points (default 50).
    #[arg(long)]
    pub points: Option<usize>,
    /// Fixed damping while sweeping something else (default 0).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fixed half splitting while sweeping something else (default 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fixed launch angle while sweeping something else (default 0).
    #[arg(long)]
    pub theta0: Option<f64>,
}
