//! Command-line front end: one subcommand per pipeline stage, so every
//! intermediate artifact (cut traces, passports, datasets, results) is an
//! inspectable file. Exit codes: 0 success, 1 validation/case failure,
//! 2 usage error. All randomness is controlled by seeds; no command mutates
//! its inputs, outputs go only under --out.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;

#[derive(Parser)]
#[command(
    name = "fdikit",
    version,
    about = "Fault identification for industrial CPS metric traces: segmentation, regression passports, tree classifiers, and knowledge/data-position sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a trace file for monotonicity, duplicate timestamps, and
    /// non-finite values
    Validate(ValidateArgs),
    /// Generate a synthetic corpus (traces, event logs, catalog)
    Synth(SynthArgs),
    /// Cut a trace into phase segments, optionally reduced to a quartile cut
    Segment(SegmentArgs),
    /// Build mean passports from the normal-labelled scenarios of a catalog
    Passport(PassportArgs),
    /// Build a labelled feature dataset from a catalog and a passport store
    Dataset(DatasetArgs),
    /// Apply a degradation plan to a stored segment set
    Degrade(DegradeArgs),
    /// Train one classifier on a dataset and save the model
    Train(TrainArgs),
    /// Cross-validate one classifier on a dataset
    Eval(EvalArgs),
    /// Run a full case sweep from a config file
    Sweep(SweepArgs),
    /// Regenerate report files from a persisted results file
    Report(ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Segment(args) => cmd_segment(args),
        Command::Passport(args) => cmd_passport(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Degrade(args) => cmd_degrade(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("event=error message={:?}", e.to_string());
            ExitCode::from(1)
        }
    }
}
