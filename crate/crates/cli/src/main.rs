use std::io::Write;

use clap::Parser;

fn main() {
    let cli = match auv_cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match auv_cli::run(&cli) {
        Ok(report) => {
            let _ = writeln!(std::io::stdout(), "{report}");
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
