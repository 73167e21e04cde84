use std::process::ExitCode;

use clap::Parser;
use gsvp_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.flags.resolve().and_then(|cfg| run(cli.command, &cfg)) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
