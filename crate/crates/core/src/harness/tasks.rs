use super::config::{RunConfig, Task};
use super::report::{witness, Artifact, Bound, Check, Num, Witness, WitnessPoint};
use crate::error::Result;
use crate::geodesic::{
    angular_potential, integrate_geodesic, null_xi, radial_classification, trapped_sphere, ConservedQuantities,
    Covector, GeodesicOptions, PhasePoint, RadialClass, Termination, Trajectory,
};
use crate::geometry::{inversion_scan, BlackHoleParams, ChartPoint};
use crate::schw_multiplier::boundary::{boundary_report, lateral_depth};
use crate::schw_multiplier::profiles::J;
use crate::schw_multiplier::quadform::{log_grid, scan_positivity};
use crate::schw_multiplier::{smallness_integral, MultiplierProfile};
use crate::sos::{mp_bracket_scan, mu_lower_bound, schw_sos_scan, Region, SosReport, SymbolPoint};
use crate::trapping::{
    measure_c_mp, r_ab, r_ab_oracle, rderiv_scan, simplicity_bound, trapped_radius, trapped_scan,
};
use crate::wavesolver::{convergence_study, run_wave, WaveRun};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Default)]
pub(super) struct Outcome {
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Num>,
    pub witness_points: Vec<WitnessPoint>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn check(&mut self, name: &str, value: f64, bound: Bound, witness: Witness) {
        self.checks.push(Check { name: name.into(), value: Num(value), pass: bound.holds(value), bound, witness });
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.into(), Num(v));
    }

    fn point(&mut self, label: &str, point: Witness) {
        self.witness_points.push(WitnessPoint { label: label.into(), point });
    }
}

fn lt(v: f64) -> Bound {
    Bound::Lt(Num(v))
}

fn le(v: f64) -> Bound {
    Bound::Le(Num(v))
}

fn gt(v: f64) -> Bound {
    Bound::Gt(Num(v))
}

fn ge(v: f64) -> Bound {
    Bound::Ge(Num(v))
}

fn symbol_witness(p: &SymbolPoint) -> Witness {
    witness([
        ("r", p.r),
        ("theta", p.theta),
        ("tau", p.tau),
        ("xi", p.xi),
        ("Theta", p.big_theta),
        ("Phi", p.phi),
        ("Psi", p.psi),
    ])
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub(super) fn run_task(task: Task, cfg: &RunConfig) -> Result<Outcome> {
    match task {
        Task::MetricInversion => metric_inversion(cfg),
        Task::Rderiv => rderiv(cfg),
        Task::TrappedScan => trapped(cfg),
        Task::Geodesic => geodesic(cfg),
        Task::MultiplierVerify => multiplier(cfg),
        Task::BoundaryForms => boundary(cfg),
        Task::SosVerify => sos(cfg),
        Task::WaveEvolve => wave(cfg),
        Task::Convergence => convergence(cfg),
        Task::All => unreachable!("composite task is dispatched by run"),
    }
}

fn metric_inversion(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let s = &cfg.sampling;
    let scan = inversion_scan(cfg.params.r_s, s.ab_max, s.inversion_r, s.samples, cfg.seed)?;
    let [a, b, r, th] = scan.witness;
    o.check(
        "inversion_defect",
        scan.defect_max,
        lt(cfg.tolerances.inversion),
        witness([("a", a), ("b", b), ("r", r), ("theta", th)]),
    );
    o.metric("samples", scan.samples as f64);
    Ok(o)
}

fn rderiv(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let s = &cfg.sampling;
    let r_s = cfg.params.r_s;
    let scan = rderiv_scan(r_s, s.ab_max, s.rderiv_r, s.samples, cfg.seed)?;
    let w = scan.witness;
    let names = ["a", "b", "r", "theta", "tau", "xi", "Theta", "Phi", "Psi"];
    let wit: Witness = names.iter().zip(w).map(|(k, v)| (k.to_string(), Num(v))).collect();
    o.check("rderiv_residual", scan.residual_max, le(cfg.tolerances.rderiv), wit);
    o.metric("samples", scan.samples as f64);

    // the closed-form R against -Delta^2 d_x(rho^2 p) by differences
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let (mut worst, mut at) = (0.0f64, [0.0; 7]);
    let mut done = 0;
    while done < s.oracle_samples {
        let a = rng.random_range(-s.ab_max..=s.ab_max) * r_s;
        let b = rng.random_range(-s.ab_max..=s.ab_max) * r_s;
        let r = rng.random_range(s.rderiv_r[0]..=s.rderiv_r[1]) * r_s;
        let th = rng.random_range(0.1..1.4);
        let [tau, phi, psi]: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let Ok(p) = BlackHoleParams::new(r_s, a, b) else { continue };
        let x = r * r;
        if p.delta(x) <= 0.0 {
            continue;
        }
        let oracle = r_ab_oracle(&p, x, th, tau, phi, psi)?;
        let v = r_ab(&p, x, tau, phi, psi);
        let scale = (x.powi(4) * (tau * tau + phi * phi + psi * psi)).max(v.abs());
        let rel = (oracle - v).abs() / scale;
        if !(rel <= worst) {
            worst = rel;
            at = [a, b, r, th, tau, phi, psi];
        }
        done += 1;
    }
    let names = ["a", "b", "r", "theta", "tau", "Phi", "Psi"];
    let wit: Witness = names.iter().zip(at).map(|(k, v)| (k.to_string(), Num(v))).collect();
    o.check("oracle_defect", worst, le(cfg.tolerances.oracle), wit);
    Ok(o)
}

fn trapped(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let tol = &cfg.tolerances;
    let blk = &cfg.trapped_scan;
    let bh = cfg.bh()?;
    let r_s = bh.r_s;
    let c_mp = match blk.c_mp {
        Some(c) => c,
        None => measure_c_mp(&bh, 1.1 * r_s, 1.8 * r_s, 16)?,
    };
    o.metric("c_mp", c_mp);
    let rows = trapped_scan(r_s, &[(bh.a, bh.b)], c_mp, blk.n)?;
    let simple = simplicity_bound(&rows, r_s);
    let weakest = rows
        .iter()
        .min_by(|x, y| (x.dr_dr.abs() / (x.tau * x.tau)).total_cmp(&(y.dr_dr.abs() / (y.tau * y.tau))))
        .expect("scan is nonempty");
    o.check(
        "simple_root",
        simple,
        gt(0.0),
        witness([("tau", weakest.tau), ("Phi", weakest.phi), ("Psi", weakest.psi), ("r", weakest.r_trapped)]),
    );
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r.r_trapped), h.max(r.r_trapped)));
    o.metric("r_trapped_min", lo);
    o.metric("r_trapped_max", hi);
    o.metric("rows", rows.len() as f64);
    let sqrt2 = std::f64::consts::SQRT_2 * r_s;
    if bh.a == 0.0 && bh.b == 0.0 {
        let worst = rows.iter().max_by(|x, y| (x.r_trapped - sqrt2).abs().total_cmp(&(y.r_trapped - sqrt2).abs())).unwrap();
        o.check(
            "scan_radius_sqrt2",
            (worst.r_trapped - sqrt2).abs() / r_s,
            lt(tol.trapped_radius),
            witness([("tau", worst.tau), ("Phi", worst.phi), ("Psi", worst.psi), ("r", worst.r_trapped)]),
        );
    }

    let p0 = BlackHoleParams::new(r_s, 0.0, 0.0)?;
    let mut dev = (0.0f64, [0.0; 4]);
    for (tau, phi, psi) in [(1.0, 0.0, 0.0), (-1.0, 0.3, -0.2), (2.0, -0.5, 0.5), (-0.5, 0.1, 0.4)] {
        let tr = trapped_radius(&p0, tau, phi, psi)?;
        let e = (tr.r - sqrt2).abs() / r_s;
        if !(e <= dev.0) {
            dev = (e, [tau, phi, psi, tr.r]);
        }
    }
    let [tau, phi, psi, r] = dev.1;
    o.check(
        "tangherlini_radius",
        dev.0,
        lt(tol.trapped_radius),
        witness([("tau", tau), ("Phi", phi), ("Psi", psi), ("r", r)]),
    );
    let ts = trapped_sphere(&p0, blk.phi_hat, blk.psi_hat)?;
    let rs2 = r_s * r_s;
    let wit = witness([("Phi_hat", blk.phi_hat), ("Psi_hat", blk.psi_hat), ("x0", ts.x0), ("K_hat", ts.k_hat)]);
    o.check("tangherlini_sphere_x0", (ts.x0 - 2.0 * rs2).abs() / rs2, lt(tol.trapped_sphere), wit.clone());
    o.check("tangherlini_sphere_k", (ts.k_hat - 4.0 * rs2).abs() / rs2, lt(tol.trapped_sphere), wit);
    o.artifacts.push(Artifact::csv("trapped_scan.csv", &rows)?);
    Ok(o)
}

fn start(x: f64, theta: f64, momentum: Covector) -> PhasePoint {
    PhasePoint { position: ChartPoint { t: 0.0, x, theta, phi: 0.0, psi: 0.0 }, momentum }
}

/// Largest `|r - r0|` over `lambda <= span`, with the affine time of the
/// first exit from the `tol` band.
fn hold(tr: &Trajectory, r0: f64, span: f64, tol: f64) -> (f64, f64, f64) {
    let (mut dev, mut at) = (0.0f64, 0.0);
    let mut exit = f64::INFINITY;
    for s in &tr.samples {
        let d = (s.point.position.r() - r0).abs();
        if d >= tol && exit.is_infinite() {
            exit = s.lambda;
        }
        if s.lambda <= span && d > dev {
            dev = d;
            at = s.lambda;
        }
    }
    (dev, at, exit)
}

fn geodesic(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let g = &cfg.geodesic;
    let tol = &cfg.tolerances;
    let bh = cfg.bh()?;
    let r_s = bh.r_s;

    let [th_mom, phi, psi] = g.angular;
    let mut m = Covector { tau: -1.0, xi_x: 0.0, theta: th_mom, phi, psi };
    m.xi_x = -null_xi(&bh, g.x0, g.theta0, &m)?;
    let opts = GeodesicOptions { tol: g.tol, h_max: g.h_max, ..Default::default() };
    let tr = integrate_geodesic(&bh, &start(g.x0, g.theta0, m), g.span * r_s, opts)?;
    let last = tr.samples.last().map_or(0.0, |s| s.lambda);
    let r_min = tr.samples.iter().map(|s| s.point.position.r()).fold(f64::INFINITY, f64::min);
    let wit = witness([("lambda_end", last), ("r_min", r_min)]);
    o.check("scattering_completed", flag(tr.termination == Termination::Completed), ge(1.0), wit.clone());
    for (name, d) in [
        ("p_drift", tr.max_p_drift),
        ("E_drift", tr.max_e_drift),
        ("Phi_drift", tr.max_phi_drift),
        ("Psi_drift", tr.max_psi_drift),
        ("K_drift", tr.max_k_drift),
    ] {
        o.check(name, d, lt(tol.drift), wit.clone());
    }
    o.metric("separated_residual", tr.max_separated_residual);
    o.artifacts.push(trajectory_csv("geodesic.csv", &tr)?);

    // Tangherlini photon sphere
    let p0 = BlackHoleParams::new(r_s, 0.0, 0.0)?;
    let ts = trapped_sphere(&p0, 0.0, 0.0)?;
    let cq = ConservedQuantities { e: 1.0, phi: 0.0, psi: 0.0, k: ts.k_hat };
    let m = Covector { tau: -1.0, xi_x: 0.0, theta: angular_potential(&p0, &cq, g.hold_theta).sqrt(), phi: 0.0, psi: 0.0 };
    let hopts = GeodesicOptions { tol: g.hold_tol, ..Default::default() };
    let span = g.hold_span * r_s;
    let tr = integrate_geodesic(&p0, &start(ts.x0, g.hold_theta, m), span, hopts)?;
    let (dev, at, _) = hold(&tr, ts.x0.sqrt(), span, tol.hold * r_s);
    o.check("hold_deviation", dev / r_s, lt(tol.hold), witness([("lambda", at), ("x0", ts.x0)]));

    // rotating trapped sphere and its unstable manifolds
    let ts = trapped_sphere(&bh, g.departure_phi, g.departure_psi)?;
    let th = g.departure_theta;
    let cq = ConservedQuantities { e: 1.0, phi: g.departure_phi, psi: g.departure_psi, k: ts.k_hat };
    let m = Covector {
        tau: -1.0,
        xi_x: 0.0,
        theta: angular_potential(&bh, &cq, th).sqrt(),
        phi: g.departure_phi,
        psi: g.departure_psi,
    };
    let tr = integrate_geodesic(&bh, &start(ts.x0, th, m), 1.2 * span, hopts)?;
    let (_, _, exit) = hold(&tr, ts.x0.sqrt(), f64::INFINITY, tol.hold * r_s);
    o.metric("hold_time_rotating", exit.min(1.2 * span));

    let k = ts.k_hat * (1.0 - g.departure_offset);
    let cq = ConservedQuantities { k, ..cq };
    let class = radial_classification(&bh, &cq)?;
    let wit = witness([("x0", ts.x0), ("K", k), ("theta", th)]);
    o.check("departure_class_escape_only", flag(class == RadialClass::EscapeOnly), ge(1.0), wit.clone());
    let theta_mom = angular_potential(&bh, &cq, th).sqrt();
    for (sign, want, name) in
        [(1.0, Termination::Escaped, "outward_escapes"), (-1.0, Termination::HorizonCrossing, "inward_crosses_horizon")]
    {
        let mut m = Covector { tau: -1.0, xi_x: 0.0, theta: theta_mom, phi: g.departure_phi, psi: g.departure_psi };
        m.xi_x = sign * null_xi(&bh, ts.x0, th, &m)?;
        let o2 = GeodesicOptions { tol: g.hold_tol.max(1e-11), r_escape: g.r_escape * r_s, ..Default::default() };
        let tr = integrate_geodesic(&bh, &start(ts.x0, th, m), g.departure_span * r_s, o2)?;
        o.check(name, flag(tr.termination == want), ge(1.0), wit.clone());
        o.metric(&format!("{name}_K_drift"), tr.max_k_drift);
    }
    Ok(o)
}

fn trajectory_csv(name: &str, tr: &Trajectory) -> Result<Artifact> {
    let mut bytes = vec![];
    tr.write_csv(&mut bytes).map_err(|e| crate::Error::Io { path: name.into(), reason: e.to_string() })?;
    Ok(Artifact { name: name.into(), bytes })
}

fn profile(cfg: &RunConfig) -> Result<MultiplierProfile> {
    MultiplierProfile::build(cfg.sp()?, cfg.multiplier.profile.clone())
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

/// Smallest value of `f` over `rs` and where it occurs.
fn min_over(rs: impl Iterator<Item = f64>, f: impl Fn(f64) -> f64) -> (f64, f64) {
    rs.map(|r| (f(r), r)).fold((f64::INFINITY, f64::NAN), |m, v| if !(v.0 >= m.0) { v } else { m })
}

fn multiplier(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let tol = &cfg.tolerances;
    let blk = &cfg.multiplier;
    let p = profile(cfg)?;
    let r_s = p.sp.r_s;
    let (lo, hi) = (p.chart.r_e, p.chart.r_max);
    let a = scan_positivity(&p, lo, hi, blk.grid);
    let b = scan_positivity(&p, lo, hi, 2 * blk.grid);
    let v = a.min_eigvec;
    o.check(
        "c_star",
        a.c_star,
        gt(0.0),
        witness([("r", a.min_r), ("u_r", v[0]), ("u_v", v[1]), ("grad_omega_u", v[2]), ("u", v[3])]),
    );
    o.check(
        "c_star_grid_stability",
        ((a.c_star - b.c_star) / b.c_star).abs(),
        lt(tol.c_star_stability),
        witness([("c_star", a.c_star), ("c_star_doubled", b.c_star), ("r_doubled", b.min_r)]),
    );
    let n = blk.samples;
    let (lf, at) = min_over(linspace(1.01 * r_s, 10.0 * r_s, n), |r| p.l_big_f(r));
    o.check("l_of_F_min", lf, gt(0.0), witness([("r", at)]));
    let (df, at) = min_over(log_grid(1.001 * r_s, 20.0 * r_s, n).into_iter(), |r| p.big_f(J::var(r)).d(1));
    o.check("F_prime_min", df, gt(0.0), witness([("r", at)]));
    let (nmin, at) = min_over(linspace(r_s, 10.0 * r_s, n).skip(1), |r| p.n_coef(r));
    o.check("n_min", nmin, gt(0.0), witness([("r", at)]));
    o.metric("eps", p.eps);
    o.metric("mollifier_n", p.mollifier.n);
    o.metric("mollification_error", p.mollification_error(2000));
    o.metric("smallness_integral", smallness_integral(&p.sp, &p.cap, p.eps, p.cfg.delta)?);
    let rows: Vec<_> = log_grid(lo, hi, blk.profile_rows).into_iter().map(|r| p.row(r)).collect();
    o.artifacts.push(Artifact::csv("profile.csv", &rows)?);
    Ok(o)
}

fn boundary(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let blk = &cfg.multiplier;
    let p = profile(cfg)?;
    let r_e = blk.boundary_r_e * p.sp.r_s;
    let rep = boundary_report(&p, blk.c_energy, r_e, blk.boundary_grid);
    o.check(
        "slice_kappa",
        rep.kappa,
        lt(cfg.tolerances.kappa_max),
        witness([("r", rep.slice_lo_r), ("slice_lo", rep.slice_lo), ("slice_hi", rep.slice_hi), ("C", blk.c_energy)]),
    );
    let v = rep.lateral_eigvec;
    o.check(
        "lateral_min_eigenvalue",
        rep.lateral_min_eig,
        gt(0.0),
        witness([("r_e", r_e), ("u_r", v[0]), ("u_v", v[1]), ("grad_omega_u", v[2]), ("u", v[3])]),
    );
    o.metric("kappa_weighted", rep.kappa_weighted);
    o.metric("kappa_exterior", rep.kappa_exterior);
    o.metric("hardy_constant", rep.hardy_constant);
    o.metric("hardy_bound", rep.hardy_bound);
    o.metric("lateral_depth", lateral_depth(&p, blk.c_energy));
    o.artifacts.push(Artifact::json("boundary.json", &rep)?);
    Ok(o)
}

fn sos(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let tol = &cfg.tolerances;
    let blk = &cfg.sos;
    let p = profile(cfg)?;
    let bh = cfg.bh()?;
    let window = Region { seed: cfg.seed, ..blk.window };
    let s = schw_sos_scan(&p, &window)?;
    let w = symbol_witness(&s.witness);
    o.check("schw_sos_residual", s.residual_max, le(tol.sos_residual), w.clone());
    o.check("nu_min", s.nu_range[0], gt(0.0), w.clone());
    o.check("nu_max", s.nu_range[1], lt(1.0), w.clone());
    o.check("lambda_identity", s.lambda_defect_max, le(tol.lambda_identity), w);
    o.metric("schw_samples", s.samples as f64);
    o.metric("shift_residual_max", s.shift_residual_max);

    let region = Region { samples: blk.bracket_samples, ..window };
    let (b, rows) = mp_bracket_scan(&bh, &p, &region)?;
    let w = symbol_witness(&b.witness);
    o.check("bracket_min", b.bracket_min, ge(tol.bracket_floor), w.clone());
    o.check("tube_ratio_min", b.tube_ratio_min, gt(0.0), w.clone());
    o.check("alpha_mp2_min", b.alpha_min, gt(0.0), w.clone());
    o.check("beta_mp2_min", b.beta_min, gt(0.0), w);
    o.metric("bracket_residual_max", b.residual_max);
    o.metric("bracket_samples", b.samples as f64);
    o.point("bracket_min", symbol_witness(&b.witness));

    let mu_region = Region { seed: cfg.seed, ..blk.mu_region };
    let m = mu_lower_bound(&bh, &p, &mu_region, blk.eps0)?;
    let w = symbol_witness(&m.witness);
    o.check("c_band_width", m.c_band[1] - m.c_band[0], ge(0.0), witness([("lo", m.c_band[0]), ("hi", m.c_band[1])]));
    o.check("mu_kappa", m.kappa, gt(0.0), w.clone());
    o.metric("C_big", m.c_big);
    o.metric("mu_envelope", m.envelope);
    o.point("mu_kappa_min", w);

    let mut ratios = vec![];
    for &eps0 in &blk.envelope_eps0 {
        let bh_e = BlackHoleParams::new(bh.r_s, 0.6 * eps0 * bh.r_s, 0.6 * eps0 * bh.r_s)?;
        let region = Region { samples: blk.envelope_samples, ..mu_region };
        let me = mu_lower_bound(&bh_e, &p, &region, eps0)?;
        ratios.push((eps0, me.envelope / eps0));
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &(_, v)| (l.min(v), h.max(v)));
    let w: Witness = ratios.iter().map(|(e, v)| (format!("envelope_over_eps0@{e}"), Num(*v))).collect();
    o.check("envelope_linearity", hi / lo, lt(tol.envelope_factor), w);

    let report = SosReport {
        residual_max: s.residual_max,
        nu_range: s.nu_range,
        kappa: m.kappa,
        c_big: m.c_big,
        eps0: blk.eps0,
        witness_points: vec![s.witness, b.witness, m.witness],
    };
    o.artifacts.push(Artifact::json("sos_report.json", &report)?);
    o.artifacts.push(Artifact::csv("bracket.csv", &rows[..rows.len().min(blk.csv_rows)])?);
    Ok(o)
}

#[derive(Serialize)]
struct EnergyRow {
    vtilde: f64,
    #[serde(rename = "E_slice")]
    e_slice: f64,
    #[serde(rename = "E_lateral_cum")]
    e_lateral_cum: f64,
}

#[derive(Serialize)]
struct FieldRow {
    r: f64,
    u: f64,
    w: f64,
}

fn wave(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let tol = &cfg.tolerances;
    let sp = cfg.sp()?;
    for &l in &cfg.wave.ls {
        let mut run = cfg.wave.run.clone();
        run.domain.l = l;
        let a = run_wave(sp, &run)?;
        let fine = WaveRun { domain: run.domain.refined(1), ..run.clone() };
        let b = run_wave(sp, &fine)?;
        let e0 = a.energy.e_initial;
        let tag = |s: &str| format!("l{l}_{s}");
        let wl = witness([("l", l as f64), ("dr", run.domain.h()), ("dt", run.domain.k())]);
        o.check(&tag("sup_energy_ratio"), a.energy.sup_e / (a.c_obs * e0), le(1.0), wl.clone());
        o.check(&tag("le1_s"), a.norms.le1_s, lt(f64::INFINITY), wl.clone());
        o.check(
            &tag("c_obs_stability"),
            ((a.c_obs - b.c_obs) / b.c_obs).abs(),
            le(tol.c_obs_stability),
            witness([("l", l as f64), ("c_obs", a.c_obs), ("c_obs_refined", b.c_obs)]),
        );
        let flux = a.energy.flux_integrand_min.min(b.energy.flux_integrand_min);
        o.check(&tag("flux_integrand_min"), flux / e0, ge(-tol.flux_floor), wl);
        for (k, v) in [
            ("c_obs", a.c_obs),
            ("c_obs_refined", b.c_obs),
            ("E_initial", e0),
            ("E_final", *a.energy.e_slice.last().unwrap_or(&0.0)),
            ("E_lateral", a.energy.e_lateral),
            ("sup_E", a.energy.sup_e),
            ("LE1_S", a.norms.le1_s),
            ("hardy_ratio_max", a.norms.hardy_ratio_max),
        ] {
            o.metric(&tag(k), v);
        }
        let rows: Vec<EnergyRow> = (0..a.energy.v.len())
            .map(|i| EnergyRow { vtilde: a.energy.v[i], e_slice: a.energy.e_slice[i], e_lateral_cum: a.energy.e_lateral_cum[i] })
            .collect();
        o.artifacts.push(Artifact::csv(&format!("energy_l{l}.csv"), &rows)?);
        o.artifacts.push(Artifact::json(&format!("norms_l{l}.json"), &a.norms)?);
        if cfg.wave.snapshots {
            let (r0, h) = (run.domain.r_e, run.domain.h());
            let f = &a.final_field;
            let rows: Vec<FieldRow> =
                (0..f.u.len()).map(|i| FieldRow { r: r0 + h * i as f64, u: f.u[i], w: f.w[i] }).collect();
            o.artifacts.push(Artifact::csv(&format!("final_field_l{l}.csv"), &rows)?);
        }
    }
    Ok(o)
}

#[derive(Serialize)]
struct LevelRow {
    dr: f64,
    dt: f64,
    energy_final: f64,
    c_obs: f64,
    field_error: Option<f64>,
    energy_error: Option<f64>,
}

fn convergence(cfg: &RunConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let tol = &cfg.tolerances;
    let blk = &cfg.convergence;
    let c = convergence_study(cfg.sp()?, &blk.run, blk.levels)?;
    let finest = c.levels.last().expect("at least three levels");
    let wit = witness([
        ("dr_finest", finest.dr),
        ("field_error_finest", *c.field_errors.last().unwrap()),
        ("energy_error_finest", *c.energy_errors.last().unwrap()),
    ]);
    let order = Bound::Within([Num(tol.order[0]), Num(tol.order[1])]);
    o.check("field_order", c.field_order, order, wit.clone());
    o.check("energy_order", c.energy_order, order, wit);
    let rows: Vec<LevelRow> = c
        .levels
        .iter()
        .enumerate()
        .map(|(i, lv)| LevelRow {
            dr: lv.dr,
            dt: lv.dt,
            energy_final: lv.energy_final,
            c_obs: lv.c_obs,
            field_error: i.checked_sub(1).map(|j| c.field_errors[j]),
            energy_error: i.checked_sub(1).map(|j| c.energy_errors[j]),
        })
        .collect();
    o.artifacts.push(Artifact::csv("convergence.csv", &rows)?);
    Ok(o)
}
