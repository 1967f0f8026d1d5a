//! Command-line front end for the dissipative qubit toolkit: argument and
//! config handling, the commands themselves, and byte-stable export.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use bloch_core::Error as CoreError;

/// Exit-code contract: 2 validation, 3 numerical or integration failure,
/// 4 physical-validity violation.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn physical(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::InvalidParameter(_)
            | CoreError::ActionOutOfRange { .. }
            | CoreError::NotNormalized { .. } => 2,
            CoreError::QuadratureNoConvergence { .. }
            | CoreError::PoleProximity { .. }
            | CoreError::NegativeSquaredRadius { .. } => 3,
            CoreError::RenormalizationBound { .. } => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn run(cli: args::Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => config::RunConfig::load(path)?,
        None => config::RunConfig::default(),
    };
    let ctx = commands::Ctx {
        out: cli.out.clone().or_else(|| cfg.out.clone()),
        format: cli.format.or(cfg.format),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        cfg,
    };
    match &cli.command {
        args::Command::Sim(a) => commands::cmd_sim(&ctx, a),
        args::Command::Gp(method) => commands::cmd_gp(&ctx, method),
        args::Command::GpThermal(a) => commands::cmd_gp_thermal(&ctx, a),
        args::Command::GpMc(a) => commands::cmd_gp_mc(&ctx, a),
        args::Command::Interf(a) => commands::cmd_interf(&ctx, a),
        args::Command::Sweep(a) => commands::cmd_sweep(&ctx, a),
    }
}
