use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kerr_interface::harness::{run, ExperimentRecord, RunConfig, THREADS_ENV};

/// Runs one experiment described by a TOML config file.
#[derive(Parser, Debug)]
#[command(version, about, after_help = format!("Set {THREADS_ENV} to limit how many sweep points are solved at once."))]
struct Args {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log progress of every solve.
    #[arg(long, short)]
    verbose: bool,
}

fn report(record: &ExperimentRecord) {
    if let Some(k0) = record.scalars.get("k0") {
        println!("k0 = {k0:.6}");
    }
    for (name, v) in record.slopes.iter().flatten() {
        println!("slope {name} = {v:.4}");
    }
    for (name, v) in &record.flags {
        println!("{name} = {v}");
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp_millis().init();

    let result = RunConfig::load(&args.config).and_then(|config| {
        let out = args.out.clone().unwrap_or_else(|| config.output_dir());
        let record = run(&config, &out)?;
        report(&record);
        eprintln!("wrote {} ({:.1} s)", out.display(), record.wall_time);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
