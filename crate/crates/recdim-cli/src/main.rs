use clap::Parser;
use recdim_cli::{execute, exit_code_for, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(output) => {
            if let Err(e) = output.deliver() {
                eprintln!("error: failed to write output: {e}");
                std::process::exit(1);
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
