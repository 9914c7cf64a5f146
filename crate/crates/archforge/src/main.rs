use clap::Parser;

fn main() {
    let cli = archforge::cli::Cli::parse();
    std::process::exit(archforge::cli::run(cli));
}
