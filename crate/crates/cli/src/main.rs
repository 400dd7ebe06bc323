use clap::Parser;

fn main() {
    let cli = toric_ell_cli::Cli::parse();
    std::process::exit(toric_ell_cli::execute(&cli));
}
