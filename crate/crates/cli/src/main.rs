use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use glyphfuzz_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = run(cli, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code)
}
