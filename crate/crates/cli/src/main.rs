use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use yggsum_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let status = run(&cli, &mut out);
    let _ = out.flush();
    ExitCode::from(status as u8)
}
