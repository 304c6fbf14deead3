use mptrap_core::harness::*;
use mptrap_core::wavesolver::InitialData;
use std::collections::BTreeMap;
use std::process::Command;

fn fast() -> RunConfig {
    let mut c = RunConfig::default();
    c.sampling.samples = 500;
    c.sampling.oracle_samples = 100;
    c.trapped_scan.n = 4;
    c.geodesic.span = 100.0;
    c.multiplier.grid = 200;
    c.multiplier.samples = 200;
    c.multiplier.boundary_grid = 200;
    c.sos.window.samples = 300;
    c.sos.bracket_samples = 300;
    c.sos.mu_region.samples = 300;
    c.sos.envelope_samples = 300;
    c.wave.ls = vec![0];
    c.wave.run.domain.r_max = 16.0;
    c.wave.run.domain.dr = 0.04;
    c.wave.run.domain.dt = 0.02;
    c.wave.run.domain.t_max = 4.0;
    c.wave.snapshots = true;
    c.convergence.run = c.wave.run.clone();
    c
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mptrap"))
}

#[test]
fn report_round_trips_through_emit() {
    let out = run(&fast(), Task::BoundaryForms);
    assert!(out.report.check("slice_kappa").unwrap().value.0.is_infinite());
    let dir = tempfile::tempdir().unwrap();
    emit(&out.report, &out.artifacts, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(RunReport::from_json(&text).unwrap(), out.report);
}

#[test]
fn emit_is_idempotent() {
    let out = run(&fast(), Task::TrappedScan);
    let dir = tempfile::tempdir().unwrap();
    let paths = emit(&out.report, &out.artifacts, dir.path()).unwrap();
    let first: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    emit(&out.report, &out.artifacts, dir.path()).unwrap();
    let second: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn empty_config_and_empty_report_are_valid() {
    let cfg = RunConfig::from_json("{}").unwrap();
    assert_eq!(cfg, RunConfig::default());
    let mut r = run(&cfg, Task::MetricInversion).report;
    r.checks.clear();
    r.metrics = BTreeMap::new();
    let text = r.to_json();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["metrics"], serde_json::json!({}));
    assert_eq!(RunReport::from_json(&text).unwrap(), r);
}

#[test]
fn csv_headers_match_contracts() {
    let want = [
        ("trapped-scan/trapped_scan.csv", "a,b,tau,Phi,Psi,r_trapped,dR_dr,newton_iters"),
        ("geodesic/geodesic.csv", "lambda,t,r,theta,phi,psi,tau,xi,Theta,Phi,Psi,p_residual,K_drift"),
        ("multiplier-verify/profile.csv", "r,f,F,f1,q1,q2,b_red,gamma,n,lF,lf"),
        ("sos-verify/bracket.csv", "r,theta,tau,xi,Theta,Phi,Psi,r_ab,bracket,representation,alpha_mp2,beta_mp2"),
        ("wave-evolve/energy_l0.csv", "vtilde,E_slice,E_lateral_cum"),
        ("wave-evolve/final_field_l0.csv", "r,u,w"),
        ("convergence/convergence.csv", "dr,dt,energy_final,c_obs,field_error,energy_error"),
    ];
    let out = run(&fast(), Task::All);
    for (name, header) in want {
        let a = out.artifacts.iter().find(|a| a.name == name).unwrap_or_else(|| panic!("missing {name}"));
        assert_eq!(a.header(), Some(header), "{name}");
    }
}

#[test]
fn tangherlini_scan_gives_sqrt2() {
    let cfg = RunConfig::from_json(r#"{"task": "trapped-scan", "params": {"a": 0, "b": 0}}"#).unwrap();
    let out = run(&cfg, Task::TrappedScan);
    assert_eq!(out.report.status, Status::Pass, "{:?}", out.report.checks);
    assert!(out.report.check("scan_radius_sqrt2").unwrap().value.0 < 1e-12);
    let csv = String::from_utf8(out.artifacts[0].bytes.clone()).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    for rec in rdr.records() {
        let r: f64 = rec.unwrap()[5].parse().unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }
}

#[test]
fn naked_singularity_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"params": {"r_s": 1.0, "a": 1.2, "b": 0.0}}"#).unwrap();
    let o = bin().args(["trapped-scan", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("no real horizon"), "{err}");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn schema_violations_are_usage_errors() {
    for (text, needle) in [
        (r#"{"sampling": {"samples": 10, "sampels": 3}}"#, "sampling.sampels"),
        (r#"{"seed": "seven"}"#, "schema violation"),
        (r#"{"convergence": {"levels": 2}}"#, "levels"),
        (r#"{"wave": {"run": {"r_e": 1.5}}}"#, "r_e"),
        (r#"[1, 2]"#, "JSON object"),
    ] {
        let err = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains(needle), "{text}: {err}");
    }
}

#[test]
fn task_mismatch_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"task": "geodesic"}"#).unwrap();
    let o = bin().args(["rderiv", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["no-such-task"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes_follow_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"sampling": {"samples": 200}}"#).unwrap();
    let o = bin().args(["metric-inversion", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("a")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin().args(["boundary-forms", "--out"]).arg(dir.path().join("b")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let r = RunReport::from_json(&std::fs::read_to_string(dir.path().join("b/report.json")).unwrap()).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.checks.iter().filter(|c| !c.pass).all(|c| !c.witness.is_empty()));
}

#[test]
fn env_var_overrides_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (env_dir, cli_dir) = (dir.path().join("env"), dir.path().join("cli"));
    let o = bin()
        .args(["metric-inversion", "--seed", "3", "--out"])
        .arg(&cli_dir)
        .env(OUT_ENV, &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("report.json").exists());
    assert!(!cli_dir.exists());
    let r = RunReport::from_json(&std::fs::read_to_string(env_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(r.config.seed, 3);
    assert_eq!(r.rng, RNG_ALGORITHM);
}

#[test]
fn identical_seed_gives_identical_report() {
    let cfg = fast();
    for task in [Task::MetricInversion, Task::Rderiv, Task::SosVerify] {
        let a = run(&cfg, task).report.without_timing().to_json();
        let b = run(&cfg, task).report.without_timing().to_json();
        assert_eq!(a, b, "{task}");
    }
    let other = RunConfig { seed: 8, ..cfg.clone() };
    let a = run(&cfg, Task::Rderiv).report;
    let b = run(&other, Task::Rderiv).report;
    assert_ne!(a.check("rderiv_residual").unwrap().witness, b.check("rderiv_residual").unwrap().witness);
}

#[test]
fn module_errors_become_failing_reports() {
    let mut cfg = fast();
    cfg.wave.run.data = InitialData::Gaussian { center: 1.0, width: 0.5, amplitude: 1.0 };
    let r = run(&cfg, Task::WaveEvolve).report;
    assert_eq!(r.status, Status::Fail);
    assert!(r.error.as_deref().unwrap().contains("not supported"), "{:?}", r.error);
    assert_eq!(r.status.exit_code(), 1);
}

#[test]
fn rough_data_convergence_is_inconclusive() {
    let mut cfg = fast();
    cfg.convergence.run.data = InitialData::Step { center: 3.0, width: 0.5, amplitude: 1.0 };
    cfg.convergence.run.domain.t_max = 10.0;
    cfg.convergence.run.domain.r_max = 24.0;
    let r = run(&cfg, Task::Convergence).report;
    assert_ne!(r.status, Status::Pass);
    if r.status == Status::Inconclusive {
        assert!(r.error.unwrap().contains("inconclusive"));
    } else {
        assert!(r.checks.iter().any(|c| !c.pass));
    }
}

#[test]
fn composite_status_is_worst_child() {
    let out = run(&fast(), Task::All);
    let r = &out.report;
    assert_eq!(r.children.len(), Task::COMPONENTS.len());
    let worst = r.children.iter().fold(Status::Pass, |s, c| s.worst(c.status));
    assert_eq!(r.status, worst);
    assert_eq!(r.child(Task::BoundaryForms).unwrap().status, Status::Fail);
    assert_eq!(r.config.task, Some(Task::All));
}
