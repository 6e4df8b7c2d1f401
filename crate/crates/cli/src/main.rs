use clap::Parser;

fn main() {
    let cli = ccds_cli::Cli::parse();
    let code = ccds_cli::run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
