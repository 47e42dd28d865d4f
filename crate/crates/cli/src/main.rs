use clap::Parser;

fn main() {
    // clap itself exits with code 2 on unknown flags or malformed values.
    let cli = ratecast_cli::args::Cli::parse();
    if let Err(err) = ratecast_cli::run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
