use clap::Parser;

fn main() {
    let cli = acmnp::cli::Cli::parse();
    std::process::exit(acmnp::cli::main_impl(cli));
}
