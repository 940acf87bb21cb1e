use clap::Parser;

fn main() {
    std::process::exit(qvortex::cli::run(qvortex::cli::Cli::parse()));
}
