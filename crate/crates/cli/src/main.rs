use std::process::ExitCode;

use clap::Parser;

use streamk_lab::{cmd_calibrate, cmd_model, cmd_run, cmd_schedule, cmd_sweep, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Schedule(args) => cmd_schedule(args).map(|text| (text, true)),
        Command::Run(args) => cmd_run(args).map(|o| (o.report, o.pass)),
        Command::Sweep(args) => cmd_sweep(args).map(|csv| {
            // the CSV goes to stdout only when no file was requested
            if args.out.is_some() { (String::new(), true) } else { (csv, true) }
        }),
        Command::Model(args) => cmd_model(args).map(|text| (text, true)),
        Command::Calibrate(args) => cmd_calibrate(args).map(|(_, text)| (text, true)),
    };
    match result {
        Ok((text, pass)) => {
            print!("{text}");
            if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
