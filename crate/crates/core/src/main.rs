use clap::Parser;

fn main() {
    let cli = pfclust::cli::Cli::parse();
    std::process::exit(pfclust::cli::run(&cli));
}
