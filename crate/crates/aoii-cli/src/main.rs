//! `aoii`: solve, tabulate, sweep, simulate, and self-validate the
//! penalty-aware transmission design. Settings resolve in three layers:
//! built-in defaults, then the `--config` file, then flags. Machine output
//! carries a schema line and a hash of the resolved settings, and reruns
//! of the same settings and seed are byte-identical.
//!
//! Exit codes: 0 success, 2 unusable input, 3 infeasible regime, 4 a
//! certificate or self-check failed.

mod commands;
mod error;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Which;
use crate::error::CliError;
use crate::output::Format;
use crate::settings::{Overlay, Settings};

#[derive(Parser)]
#[command(
    name = "aoii",
    version,
    about = "Penalty-aware transmission scheduling: exact solver, baselines, and simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Key=value settings file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of source states (at least 2).
    #[arg(long = "N", value_name = "COUNT")]
    n_states: Option<u32>,
    /// Probability the source holds its value for a slot.
    #[arg(long, value_name = "PROB")]
    p_remain: Option<f64>,
    /// Probability a transmission is delivered.
    #[arg(long, value_name = "PROB")]
    p_success: Option<f64>,
    /// Transmission budget as a long-run fraction of slots, in (0, 1].
    #[arg(long, value_name = "FRACTION")]
    alpha: Option<f64>,
    /// Simulated slots per run.
    #[arg(long, value_name = "SLOTS")]
    horizon: Option<u64>,
    /// Seed for the simulator; sweeps derive one seed per cell.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Slots discarded before measurement starts.
    #[arg(long = "burn-in", value_name = "SLOTS")]
    burn_in: Option<u64>,
    /// Output serialization (solve without it prints plain text).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the budgeted design problem and certify the result.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulate the optimal switch point across source stickiness values.
    Switchpoints {
        #[command(flatten)]
        common: CommonArgs,
        /// Stickiness values to tabulate, comma separated.
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        p_remain_grid: Option<Vec<f64>>,
    },
    /// Simulate a curve family with closed-form overlays.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Curve family to produce.
        #[arg(long, value_enum)]
        which: Option<Which>,
        /// Stickiness grid for the stickiness sweep.
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        p_remain_grid: Option<Vec<f64>>,
        /// Budget grid for the budget sweeps.
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        alpha_grid: Option<Vec<f64>>,
    },
    /// Run one policy and report batch-means statistics.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Policy to run, e.g. threshold:7, mixture:7:0.25, aoi-threshold:4.
        #[arg(long, value_name = "SPEC")]
        policy: Option<String>,
    },
    /// Cross-check closed forms, solver, and simulator; exit 4 on failure.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Defaults, then file, then flags. Returns the resolved settings plus
/// output routing (format stays `None` when nothing asked for one).
fn resolve(
    common: &CommonArgs,
    extra: Overlay,
) -> Result<(Settings, Option<Format>, Option<PathBuf>), CliError> {
    let mut st = Settings::default();
    let mut format = None;
    let mut out = None;
    if let Some(path) = &common.config {
        let file = settings::parse_file(path)?;
        st.apply(&file);
        format = file.format;
        out = file.out;
    }
    let flags = Overlay {
        n_states: common.n_states,
        p_remain: common.p_remain,
        p_success: common.p_success,
        alpha: common.alpha,
        horizon_slots: common.horizon,
        burn_in_slots: common.burn_in,
        seed: common.seed,
        ..Overlay::default()
    };
    st.apply(&flags);
    st.apply(&extra);
    if common.format.is_some() {
        format = common.format;
    }
    if common.out.is_some() {
        out = common.out.clone();
    }
    Ok((st, format, out))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Solve { common } => {
            let (st, format, out) = resolve(&common, Overlay::default())?;
            commands::cmd_solve(&st, format, out.as_deref())
        }
        Cmd::Switchpoints {
            common,
            p_remain_grid,
        } => {
            let extra = Overlay {
                p_remain_grid,
                ..Overlay::default()
            };
            let (st, format, out) = resolve(&common, extra)?;
            commands::cmd_switchpoints(&st, format.unwrap_or(Format::Csv), out.as_deref())
        }
        Cmd::Sweep {
            common,
            which,
            p_remain_grid,
            alpha_grid,
        } => {
            let extra = Overlay {
                p_remain_grid,
                alpha_grid,
                which: which.map(|w| w.tag().to_string()),
                ..Overlay::default()
            };
            let (mut st, format, out) = resolve(&common, extra)?;
            let which = match &st.which {
                Some(tag) => Which::from_tag(tag)?,
                None => {
                    return Err(CliError::Config(
                        "sweep needs --which or the 'which' key".into(),
                    ))
                }
            };
            st.which = Some(which.tag().to_string());
            commands::cmd_sweep(&st, which, format.unwrap_or(Format::Csv), out.as_deref())
        }
        Cmd::Simulate { common, policy } => {
            let extra = Overlay {
                policy,
                ..Overlay::default()
            };
            let (st, format, out) = resolve(&common, extra)?;
            commands::cmd_simulate(&st, format.unwrap_or(Format::Csv), out.as_deref())
        }
        Cmd::Validate {
            common,
            inject_fault,
        } => {
            let (st, _, _) = resolve(&common, Overlay::default())?;
            commands::cmd_validate(&st, inject_fault)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
