//! `gldef`: construction and verification pipelines.
//!
//! Exit codes: 0 every floor held, 2 a floor or construction failed,
//! 3 bad configuration, 4 the input violates a precondition.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use gldef::GlError;

use commands::Outcome;
use config::{Cli, PipelineConfig};

const BAD_CONFIG: u8 = 3;

fn exit_code(e: &GlError) -> u8 {
    match e {
        GlError::InvalidParameter(_) | GlError::Dimension { .. } | GlError::Format(_) | GlError::Io(_) => BAD_CONFIG,
        GlError::Precondition(_) | GlError::CollarScaleUnderflow { .. } | GlError::NonPositive { .. } | GlError::NotSpd(_) | GlError::Domain { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(BAD_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = std::env::var("GLDEF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        gldef::par::init_threads(n);
    }
    let result = PipelineConfig::resolve(cli.command, cli.options).and_then(|cfg| commands::run(&cfg, &mut std::io::stdout()));
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
