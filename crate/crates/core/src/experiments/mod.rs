//! Scenario runner: configuration, parallel execution and the output layer.
//!
//! A run validates the whole configuration first, computes every artifact in
//! memory on a worker pool, then writes CSV, SVG and JSON files plus a
//! manifest from the coordinating thread.

pub mod config;
pub mod output;
pub mod plot;
pub mod scenarios;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde_json::json;

pub use config::ExperimentConfig;
pub use output::{CsvTable, OutputDir, RunManifest};
pub use scenarios::Artifacts;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    RmtScan,
    Dynamics,
    Stability,
    ChargingTime,
    PowerScaling,
    QfiTable,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::RmtScan,
        Scenario::Dynamics,
        Scenario::Stability,
        Scenario::ChargingTime,
        Scenario::PowerScaling,
        Scenario::QfiTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::RmtScan => "rmt-scan",
            Scenario::Dynamics => "dynamics",
            Scenario::Stability => "stability",
            Scenario::ChargingTime => "charging-time",
            Scenario::PowerScaling => "power-scaling",
            Scenario::QfiTable => "qfi-table",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
            Error::Config(format!("unknown scenario {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub artifacts: Artifacts,
}

/// Process exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Argument(_) => 2,
        Error::Numerical(_) | Error::InvalidState(_) => 3,
        Error::Io(_) => 1,
    }
}

/// Validate, compute and write one scenario into `out_dir`.
pub fn run(scenario: Scenario, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    if let Some(name) = &cfg.scenario {
        if name != scenario.name() {
            return Err(Error::Config(format!("config is for scenario {name:?}, not {scenario}")));
        }
    }
    let seed = cfg.master_seed()?;
    let plan = scenarios::plan(scenario, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    // parallelism lives at the task level; dense kernels stay sequential so
    // results do not depend on the thread count
    faer::set_global_parallelism(faer::Par::Seq);
    let artifacts = pool.install(|| scenarios::execute(&plan)).map_err(|e| match e {
        Error::Argument(m) => Error::Numerical(m),
        other => other,
    })?;

    let config_hash = cfg.hash()?;
    let mut out = OutputDir::create(out_dir)?;
    for (name, table) in &artifacts.tables {
        out.write(name, table.render().as_bytes())?;
    }
    for (name, svg) in &artifacts.plots {
        out.write(name, svg.as_bytes())?;
    }
    let summary = json!({
        "scenario": scenario.name(),
        "master_seed": seed,
        "config_hash": config_hash,
        "results": artifacts.summary,
    });
    out.write("summary.json", serde_json::to_string_pretty(&summary).unwrap().as_bytes())?;
    let manifest = RunManifest {
        scenario: scenario.name().into(),
        master_seed: seed,
        config_hash,
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: out.entries().to_vec(),
    };
    std::fs::write(out.path().join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(RunReport { out_dir: out_dir.to_path_buf(), manifest, artifacts })
}
