use clap::Parser;
use gbspam_cli::{run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        let msg = format!("{e:#}").replace('\n', " ");
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}
