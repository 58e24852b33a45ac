use std::process::ExitCode;

use mixlab::cli;
use mixlab::Error;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let spec = match cli::parse_run_spec(&argv, None) {
        Ok(spec) => spec,
        Err(Error::Usage(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    log::info!(
        "resolved spec: {}",
        serde_json::to_string(&spec.echo).unwrap_or_default()
    );
    ExitCode::from(cli::run(&spec) as u8)
}
