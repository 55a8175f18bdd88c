use clap::Parser;
use mmg_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = mmg_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
