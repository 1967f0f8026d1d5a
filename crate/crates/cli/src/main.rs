use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BLOCH_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = bloch_cli::args::Cli::parse();
    if let Err(e) = bloch_cli::run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
