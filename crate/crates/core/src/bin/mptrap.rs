use clap::Parser;
use mptrap_core::harness::{emit, load_config, run, RunConfig, RunReport, Task, OUT_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

/// Runs a verification task and writes `report.json` plus CSV tables.
///
/// Exit status: 0 when the task passes, 1 when it fails or is
/// inconclusive, 2 on usage or configuration errors. The output directory
/// is taken from MPTRAP_OUT, then --out, then the config, then `mptrap-out`.
#[derive(Parser)]
#[command(name = "mptrap", version)]
struct Cli {
    #[arg(value_enum)]
    task: Task,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("mptrap: {msg}");
    ExitCode::from(2)
}

fn summarize(r: &RunReport, indent: usize) {
    let pad = " ".repeat(indent);
    println!("{pad}{} {:?} ({:.1} s)", r.task, r.status, r.wall_time_s);
    for c in &r.checks {
        println!("{pad}  {} {} = {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value.0);
    }
    if let Some(e) = &r.error {
        println!("{pad}  error: {e}");
    }
    for child in &r.children {
        summarize(child, indent + 2);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => return usage(e),
        },
        None => RunConfig::default(),
    };
    if let Some(t) = cfg.task.filter(|t| *t != cli.task) {
        return usage(format!("config names task {t} but {} was requested", cli.task));
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let dir = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or(cli.out)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("mptrap-out"));
    cfg.out = Some(dir.clone());

    let out = run(&cfg, cli.task);
    summarize(&out.report, 0);
    if let Err(e) = emit(&out.report, &out.artifacts, &dir) {
        eprintln!("mptrap: {e}");
        return ExitCode::from(1);
    }
    println!("report written to {}", dir.join("report.json").display());
    ExitCode::from(out.report.status.exit_code() as u8)
}
