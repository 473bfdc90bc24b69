use clap::Parser;

use commcrawl::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("{}", e.to_json_line());
        std::process::exit(1);
    }
}
