use clap::Parser;

fn main() {
    let cli = grasp::cli::Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(cli.log_level()))
        .format_timestamp(None)
        .init();
    if let Err(e) = grasp::cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
