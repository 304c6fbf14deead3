//! Configuration, dispatch and result files for the verification tasks.

mod config;
mod report;
mod tasks;

pub use config::{
    ConvergenceBlock, GeodesicBlock, MultiplierBlock, ParamsBlock, RunConfig, SamplingBlock, SchwBlock, SosBlock,
    Task, Tolerances, TrappedScanBlock, WaveBlock,
};
pub use report::{emit, witness, Artifact, Bound, Check, Num, RunReport, Status, Witness, WitnessPoint};

use crate::error::{Error, Result};
use std::path::Path;
use std::time::Instant;

/// Generator used for every random sample.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/seed_from_u64";

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "MPTRAP_OUT";

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })?;
    RunConfig::from_json(&text)
}

/// Runs `task` on a validated config. Module errors end the task with a
/// failing report; they are never propagated.
pub fn run(cfg: &RunConfig, task: Task) -> RunOutput {
    let clock = Instant::now();
    let echo = RunConfig { task: Some(task), ..cfg.clone() };
    let mut report = RunReport {
        task,
        status: Status::Pass,
        checks: vec![],
        metrics: Default::default(),
        witness_points: vec![],
        error: None,
        children: vec![],
        wall_time_s: 0.0,
        config: echo,
        version: env!("CARGO_PKG_VERSION").into(),
        rng: RNG_ALGORITHM.into(),
    };
    let mut artifacts = vec![];
    if task == Task::All {
        for t in Task::COMPONENTS {
            let out = run(cfg, t);
            report.status = report.status.worst(out.report.status);
            artifacts.extend(
                out.artifacts.into_iter().map(|a| Artifact { name: format!("{}/{}", t.name(), a.name), ..a }),
            );
            report.children.push(out.report);
        }
    } else {
        match tasks::run_task(task, cfg) {
            Ok(o) => {
                report.status = if o.checks.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail };
                report.checks = o.checks;
                report.metrics = o.metrics;
                report.witness_points = o.witness_points;
                artifacts = o.artifacts;
            }
            Err(e) => {
                report.status =
                    if matches!(e, Error::InconclusiveConvergence(_)) { Status::Inconclusive } else { Status::Fail };
                report.error = Some(e.to_string());
            }
        }
    }
    report.wall_time_s = clock.elapsed().as_secs_f64();
    RunOutput { report, artifacts }
}
