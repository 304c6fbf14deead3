use mptrap_core::geometry::{IngoingChart, SchwParams};
use mptrap_core::numerics::{quad, smooth, Jet};
use mptrap_core::schw_multiplier::boundary::hardy_constant;
use mptrap_core::wavesolver::*;
use mptrap_core::Error;
use proptest::prelude::*;

fn sp() -> SchwParams {
    SchwParams::new(1.0, 1).unwrap()
}

fn operator(dom: &SolverDomain) -> ModeOperator {
    let chart = IngoingChart::new(sp(), dom.r_e, dom.r_max).unwrap();
    assemble_mode(sp(), &chart, dom).unwrap()
}

fn short_run(l: u32, t: f64, r_max: f64) -> WaveRun {
    let mut run = WaveRun::default();
    run.domain.l = l;
    run.domain.t_max = t;
    run.domain.r_max = r_max;
    run
}

#[test]
fn constants_are_static_solutions() {
    let op = operator(&SolverDomain { r_max: 20.0, ..Default::default() });
    let out = op.spatial(&vec![1.0; op.len()]);
    assert!(out.iter().all(|x| x.abs() < 1e-12), "{:e}", out.iter().fold(0.0f64, |m, x| m.max(x.abs())));
}

#[test]
fn spatial_operator_is_second_order() {
    let prof = |r: Jet<3>| (-(r - 3.0) * (r - 3.0)).exp();
    let mut errs = vec![];
    for m in 0..3 {
        let dom = SolverDomain { r_max: 10.0, l: 1, dr: 0.005, ..Default::default() }.refined(m);
        let op = operator(&dom);
        let u: Vec<f64> = op.r.iter().map(|&r| prof(Jet::var(r)).val()).collect();
        let num = op.spatial(&u);
        let err = op
            .r
            .iter()
            .zip(&num)
            .map(|(&r, x)| {
                let rj = Jet::<3>::var(r);
                let rk = rj.powi(3);
                let exact = (rk * sp().a_fn(rj) * prof(rj).deriv()).deriv() / rk;
                (x - (exact.val() - op.lambda * prof(rj).val() / (r * r))).abs()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..2.2).contains(&order), "{errs:?}");
    }
}

#[test]
fn far_field_is_flat_radial_operator() {
    let op = operator(&SolverDomain { r_max: 200.0, dr: 0.05, ..Default::default() });
    let i = op.len() - 2;
    let r = op.r[i];
    let (c_rr, c_r) = op.radial_coefficients(i);
    assert!((c_rr - 1.0).abs() < 2.0 / (r * r), "{c_rr}");
    assert!((c_r * r / 3.0 - 1.0).abs() < 1e-3, "{c_r}");
    assert!(op.shift[i].abs() < 1e-14);
}

#[test]
fn zero_data_gives_zero_history() {
    let run = short_run(1, 2.0, 10.0);
    let op = operator(&run.domain);
    let h = evolve(&op, ModeField::zeros(op.len()), &Forcing::None).unwrap();
    assert!(h.snapshots.iter().all(|s| s.u.iter().chain(&s.w).all(|x| *x == 0.0)));
    let (e, n) = diagnostics(&h, &op);
    assert!(e.e_slice.iter().all(|x| *x == 0.0));
    assert_eq!((e.e_lateral, e.sup_e, n.le1_s), (0.0, 0.0, 0.0));
}

#[test]
fn slice_energy_matches_quadrature() {
    let dom = SolverDomain { r_max: 8.0, dr: 0.001, l: 2, ..Default::default() };
    let op = operator(&dom);
    let (c, wd, v) = (3.0, 1.5, 0.7_f64);
    let decay = (-v).exp();
    let u = |r: f64| decay * smooth::bump((r - c) / wd);
    let ur = |r: f64| {
        let x = (r - c) / wd;
        if x.abs() >= 1.0 {
            0.0
        } else {
            u(r) * (-2.0 * x / (1.0 - x * x).powi(2)) / wd
        }
    };
    let lam = op.lambda;
    let exact = quad::integrate(|r| (ur(r).powi(2) + u(r).powi(2) * (1.0 + lam / (r * r))) * r.powi(3), c - wd, c + wd, 1e-15);
    let uu: Vec<f64> = op.r.iter().map(|&r| u(r)).collect();
    let ww: Vec<f64> = uu.iter().map(|x| -x).collect();
    let e = slice_energy(&op, &uu, &ww);
    assert!(((e - exact) / exact).abs() < 1e-10, "{e} vs {exact}");
}

#[test]
fn energy_self_converges_at_late_time() {
    let run = WaveRun::default();
    let a = run_wave(sp(), &run).unwrap();
    let fine = WaveRun { domain: run.domain.refined(1), ..run };
    let b = run_wave(sp(), &fine).unwrap();
    let (ea, eb) = (a.energy.e_slice.last().unwrap(), b.energy.e_slice.last().unwrap());
    assert!(((ea - eb) / eb).abs() < 1e-3, "{ea} {eb}");
    assert!(((a.c_obs - b.c_obs) / b.c_obs).abs() < 0.05);
    assert_eq!(a.energy.e_slice[0], a.energy.e_initial);
}

#[test]
fn photon_sphere_dip_in_le_density() {
    let mut run = short_run(2, 20.0, 30.0);
    run.data = InitialData::Bump { center: sp().r_ps(), width: 0.4, amplitude: 1.0 };
    let res = run_wave(sp(), &run).unwrap();
    let rps = sp().r_ps();
    let ann: Vec<_> = res.norms.density.iter().filter(|d| (1.0..=2.0).contains(&d.r)).collect();
    let at = ann.iter().min_by(|a, b| (a.r - rps).abs().total_cmp(&(b.r - rps).abs())).unwrap();
    let wmax = ann.iter().map(|d| d.weighted).fold(0.0, f64::max);
    let umax = ann.iter().map(|d| d.unweighted).fold(0.0, f64::max);
    assert!(at.weighted < 1e-3 * wmax, "{} {}", at.weighted, wmax);
    assert!(at.unweighted > 0.1 * umax, "{} {}", at.unweighted, umax);
}

#[test]
fn outer_boundary_does_not_reflect() {
    let a = run_wave(sp(), &short_run(1, 20.0, 40.95)).unwrap();
    let b = run_wave(sp(), &short_run(1, 20.0, 60.95)).unwrap();
    let inner = ((15.0 - 0.95) / 0.02) as usize;
    for i in 0..inner {
        assert!((a.final_field.u[i] - b.final_field.u[i]).abs() < 1e-6);
    }
    assert!((a.energy.e_lateral - b.energy.e_lateral).abs() < 1e-6 * b.energy.e_lateral);
    for (x, y) in a.norms.annuli.iter().zip(&b.norms.annuli).filter(|(x, _)| x.r_hi <= 16.0) {
        assert!((x.u_r - y.u_r).abs() < 1e-6 * y.u_r.max(1e-300));
    }
}

#[test]
fn smooth_pulse_converges_at_second_order() {
    let mut run = short_run(0, 20.0, 34.0);
    run.domain.dr = 0.01;
    run.domain.dt = 0.005;
    let c = convergence_study(sp(), &run, 3).unwrap();
    assert!((1.8..=2.2).contains(&c.field_order), "{c:?}");
    assert!((1.8..=2.2).contains(&c.energy_order), "{c:?}");
    assert!(!c.low_order);
}

#[test]
fn discontinuous_data_not_second_order() {
    let mut run = short_run(0, 10.0, 24.0);
    run.domain.dr = 0.04;
    run.domain.dt = 0.02;
    run.data = InitialData::Step { center: 3.0, width: 0.5, amplitude: 1.0 };
    match convergence_study(sp(), &run, 3) {
        Ok(c) => assert!(c.low_order, "{c:?}"),
        Err(e) => assert!(matches!(e, Error::InconclusiveConvergence(_)), "{e}"),
    }
}

#[test]
fn forcing_norm_is_reported() {
    let mut run = short_run(1, 10.0, 24.0);
    run.forcing = Forcing::Pulse { center: 5.0, width: 1.0, amplitude: 0.5, v_center: 3.0, v_width: 2.0 };
    let res = run_wave(sp(), &run).unwrap();
    let s = res.norms.le_star_s.unwrap();
    assert!(s.is_finite() && s > 0.0);
}

#[test]
fn cfl_violation_rejected() {
    let mut run = short_run(0, 1.0, 10.0);
    run.domain.dt = 0.05;
    assert!(matches!(run_wave(sp(), &run), Err(Error::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lateral_flux_and_hardy(center in 2.2f64..5.0, width in 0.3f64..1.0, l in 0u32..3) {
        let mut run = short_run(l, 6.0, 16.0);
        run.domain.dr = 0.04;
        run.domain.dt = 0.02;
        run.data = InitialData::Bump { center, width, amplitude: 1.0 };
        let res = run_wave(sp(), &run).unwrap();
        let e = &res.energy;
        prop_assert!(e.flux_integrand_min >= -1e-12 * e.e_initial);
        prop_assert!(e.e_slice.iter().all(|x| *x >= 0.0) && e.e_lateral >= 0.0);
        let ch = hardy_constant(1.0, run.domain.r_e, run.domain.r_max, 300);
        prop_assert!(res.norms.hardy_ratio_max <= ch / run.domain.r_e, "{}", res.norms.hardy_ratio_max);
    }
}
