//! Command-line front end.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use collisionless::Error;

use args::{Cli, Command};
use commands::Ctx;
use manifest::Recorder;

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NO_EXISTENCE: u8 = 2;
pub const EXIT_NO_ROOT: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn general(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::LeftQuadrant { .. } | Error::PoleCrossing { .. } => EXIT_NO_ROOT,
            _ => EXIT_ERROR,
        };
        let mut message = e.to_string();
        if matches!(e, Error::ZeroMode { .. }) {
            message.push_str("; closed-form branches of the hopper and juggler are available through `analytic2`");
        }
        Failure { code, message }
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let config = serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null);
    let mut ctx = Ctx {
        json: cli.global.json,
        seed: cli.global.seed,
        tol: cli.global.tol,
        config: cli.global.config.as_deref(),
        rec: Recorder::new(&cli.global.out),
    };
    let result = match &cli.command {
        Command::ListModels => commands::list_models(&ctx),
        Command::Solve {
            model,
            grid,
            pick,
            samples,
        } => commands::solve(&mut ctx, model, grid, *pick, *samples),
        Command::Contour {
            model,
            grid,
            asymptotes,
            format,
        } => commands::contour(&mut ctx, model, grid, *asymptotes, *format),
        Command::Trajectory {
            model,
            grid,
            pick,
            samples,
            format,
        } => commands::trajectory(&mut ctx, model, grid, *pick, *samples, *format),
        Command::Validate { model, trajectory } => commands::validate_cmd(&mut ctx, model, trajectory),
        Command::Analytic2 {
            family,
            nu1,
            omega2,
            omega1p,
            branches,
        } => commands::analytic2_cmd(&mut ctx, *family, *nu1, *omega2, *omega1p, *branches),
        Command::Critical {
            model,
            study_c0,
            sample_spectra,
            dim,
            samples,
            epsilon,
            o_max,
            branches,
        } => commands::critical_cmd(
            &mut ctx,
            model,
            *study_c0,
            *sample_spectra,
            *dim,
            *samples,
            *epsilon,
            *o_max,
            *branches,
        ),
        Command::Reproduce { perturb, .. } => commands::reproduce_cmd(&mut ctx, *perturb),
    };
    let (code, error) = match result {
        Ok(code) => (code, None),
        Err(f) => {
            eprintln!("error: {}", f.message);
            (f.code, Some(f.message))
        }
    };
    if !matches!(cli.command, Command::ListModels) {
        if let Err(e) = ctx.rec.finish(cli.command.name(), config, cli.global.seed, code, error) {
            eprintln!("error: could not write the run manifest: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    ExitCode::from(code)
}
