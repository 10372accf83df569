use std::io::Write;
use std::process::ExitCode;

use retire::cli::{run, RunConfig};

fn main() -> ExitCode {
    let cfg = match RunConfig::from_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let out = run(&cfg);
    if let Some(json) = &out.json {
        if cfg.out.is_none() || cfg.subcommand == retire::cli::Subcommand::Simulate {
            let _ = std::io::stdout().write_all(json.as_bytes());
        }
    }
    if let Some(msg) = &out.diagnostic {
        eprintln!("retire: {}", msg.replace('\n', " "));
    }
    ExitCode::from(out.exit_code as u8)
}
