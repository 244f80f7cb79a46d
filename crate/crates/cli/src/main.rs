use std::process::ExitCode;

use clap::Parser;
use lorot_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("LOROT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cfg = RunConfig::resolve(&cli);
    match run(&cfg) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.document).expect("summary serializes"));
            if out.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("lorot: failed checks: {}", out.failures.join(", "));
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("lorot: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
