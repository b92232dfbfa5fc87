use std::process::ExitCode;

use kbnovelty::cli;
use kbnovelty::error::exit;

fn main() -> ExitCode {
    let (parsed, resolved) = match cli::parse(std::env::args_os().collect()) {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = match parsed.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    ExitCode::from(cli::run(parsed, resolved) as u8)
}
