use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qbattery::experiments::{self, ExperimentConfig, Scenario};

/// Run a kicked quantum-battery scenario and write its CSV, SVG and JSON outputs.
#[derive(Debug, Parser)]
#[command(name = "qbattery", version)]
struct Cli {
    /// rmt-scan, dynamics, stability, charging-time, power-scaling or qfi-table
    scenario: String,
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `seed` in the file
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `threads` in the file
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `out_dir` in the file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = (|| {
        let scenario: Scenario = cli.scenario.parse()?;
        let mut cfg = ExperimentConfig::load(&cli.config)?;
        if cli.seed.is_some() {
            cfg.seed = cli.seed;
        }
        if cli.threads.is_some() {
            cfg.threads = cli.threads;
        }
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out").join(scenario.name()));
        cfg.out_dir = None;
        experiments::run(scenario, &cfg, &out)
    })();
    match result {
        Ok(report) => {
            for o in &report.manifest.outputs {
                println!("{}  {}", o.sha256, report.out_dir.join(&o.file).display());
            }
            println!("wall time {:.2} s", report.manifest.wall_time_seconds);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qbattery: {e}");
            ExitCode::from(experiments::exit_code(&e) as u8)
        }
    }
}
