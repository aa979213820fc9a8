//! Runs an experiment config the same way the `kerr-run` binary does.
//!
//! cargo run --release --example run_config -- configs/h_sweep.toml /tmp/h_sweep

use std::path::PathBuf;

use kerr_interface::harness::{run, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "configs/residual_trace.toml".into()));
    let config = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| config.output_dir());
    match run(&config, &out) {
        Ok(record) => println!("{}", serde_json::to_string_pretty(&record).unwrap()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
