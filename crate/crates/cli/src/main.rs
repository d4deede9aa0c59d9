use clap::Parser;

fn main() {
    let cli = randtoep_cli::Cli::parse();
    if let Err(e) = randtoep_cli::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
