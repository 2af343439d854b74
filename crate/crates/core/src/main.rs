use clap::Parser;

use biphoton::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("sim: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
