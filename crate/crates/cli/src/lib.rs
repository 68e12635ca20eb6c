//! Command implementations behind the `streamk-lab` binary.
//!
//! Each `cmd_*` function takes its parsed arguments and returns the text
//! the binary prints, so the commands can be driven from tests.

pub mod calibrate;
pub mod common;
pub mod model;
pub mod run;
pub mod schedule;
pub mod sweep;

use clap::{Parser, Subcommand};

pub use calibrate::{cmd_calibrate, CalibrateArgs};
pub use model::{cmd_model, ModelArgs};
pub use run::{cmd_run, RunArgs};
pub use schedule::{cmd_schedule, ScheduleArgs};
pub use sweep::{cmd_sweep, SweepArgs};

#[derive(Parser, Debug)]
#[command(name = "streamk-lab", version, about = "Stream-K work-decomposition lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose a problem, simulate it and report utilization.
    Schedule(ScheduleArgs),
    /// Execute a schedule on seeded matrices and verify the result.
    Run(RunArgs),
    /// Simulate a log-sampled corpus of shapes and emit CSV.
    Sweep(SweepArgs),
    /// Tabulate predicted time over grid sizes.
    Model(ModelArgs),
    /// Fit cost-model constants from microbenchmarks.
    Calibrate(CalibrateArgs),
}
