use mptrap_core::geodesic::*;
use mptrap_core::geometry::{BlackHoleParams, ChartPoint};

fn start(x: f64, theta: f64, m: Covector) -> PhasePoint {
    PhasePoint {
        position: ChartPoint { t: 0.0, x, theta, phi: 0.0, psi: 0.0 },
        momentum: m,
    }
}

fn opts(tol: f64) -> GeodesicOptions {
    GeodesicOptions { tol, ..Default::default() }
}

#[test]
fn tangherlini_photon_sphere_holds() {
    let p = BlackHoleParams::new(1.0, 0.0, 0.0).unwrap();
    let m = Covector { tau: -1.0, xi_x: 0.0, theta: 2.0, phi: 0.0, psi: 0.0 };
    let tr = integrate_geodesic(&p, &start(2.0, 0.6, m), 50.0, opts(1e-12)).unwrap();
    assert_eq!(tr.termination, Termination::Completed);
    let dev = tr
        .samples
        .iter()
        .map(|s| (s.point.position.r() - 2f64.sqrt()).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-3, "deviation {dev}");
}

#[test]
fn perturbed_sphere_departs_in_both_directions() {
    let p = BlackHoleParams::new(1.0, 0.05, 0.03).unwrap();
    let ts = trapped_sphere(&p, 0.1, -0.05).unwrap();
    // slightly below the double-root value of K the barrier opens
    let k_hat = ts.k_hat * (1.0 - 1e-6);
    let th: f64 = 0.8;
    let cq = ConservedQuantities { e: 1.0, phi: 0.1, psi: -0.05, k: k_hat };
    let theta_mom = angular_potential(&p, &cq, th).sqrt();
    for (sign, want) in [(1.0, Termination::Escaped), (-1.0, Termination::HorizonCrossing)] {
        let mut m = Covector { tau: -1.0, xi_x: 0.0, theta: theta_mom, phi: 0.1, psi: -0.05 };
        m.xi_x = sign * null_xi(&p, ts.x0, th, &m).unwrap();
        let o = GeodesicOptions { r_escape: 20.0, ..opts(1e-11) };
        let tr = integrate_geodesic(&p, &start(ts.x0, th, m), 400.0, o).unwrap();
        assert_eq!(tr.termination, want);
        assert!(tr.max_k_drift < 1e-7, "K drift {}", tr.max_k_drift);
    }
}

#[test]
fn radial_ray_keeps_angles() {
    let p = BlackHoleParams::new(1.0, 0.0, 0.0).unwrap();
    let mut m = Covector { tau: -1.0, xi_x: 0.0, theta: 0.0, phi: 0.0, psi: 0.0 };
    m.xi_x = null_xi(&p, 4.0, 0.7, &m).unwrap();
    let tr = integrate_geodesic(&p, &start(4.0, 0.7, m), 20.0, opts(1e-10)).unwrap();
    for s in &tr.samples {
        let q = s.point.position;
        assert_eq!((q.theta, q.phi, q.psi), (0.7, 0.0, 0.0));
    }
}

#[test]
fn scattering_ray_conserves_constants() {
    let p = BlackHoleParams::new(1.0, 0.05, 0.03).unwrap();
    let mut m = Covector { tau: -1.0, xi_x: 0.0, theta: 1.5, phi: 2.0, psi: -1.2 };
    m.xi_x = -null_xi(&p, 36.0, 0.9, &m).unwrap();
    let o = GeodesicOptions { h_max: 1.0, ..opts(1e-12) };
    let tr = integrate_geodesic(&p, &start(36.0, 0.9, m), 1000.0, o).unwrap();
    assert_eq!(tr.termination, Termination::Completed);
    let rmin = tr.samples.iter().map(|s| s.point.position.r()).fold(f64::MAX, f64::min);
    assert!(rmin > 1.5 && rmin < 6.0, "periapsis {rmin}");
    for d in [tr.max_p_drift, tr.max_e_drift, tr.max_phi_drift, tr.max_psi_drift, tr.max_k_drift] {
        assert!(d < 1e-8, "drift {d}");
    }
    assert!(tr.max_separated_residual < 1e-11, "{}", tr.max_separated_residual);
}

#[test]
fn rotating_hold_time_is_finite_but_long() {
    let p = BlackHoleParams::new(1.0, 0.05, 0.03).unwrap();
    let ts = trapped_sphere(&p, 0.1, -0.05).unwrap();
    let th: f64 = 0.8;
    let cq = ConservedQuantities { e: 1.0, phi: 0.1, psi: -0.05, k: ts.k_hat };
    let m = Covector {
        tau: -1.0,
        xi_x: 0.0,
        theta: angular_potential(&p, &cq, th).sqrt(),
        phi: 0.1,
        psi: -0.05,
    };
    let tr = integrate_geodesic(&p, &start(ts.x0, th, m), 60.0, opts(1e-12)).unwrap();
    let r0 = ts.x0.sqrt();
    let hold = tr
        .samples
        .iter()
        .take_while(|s| (s.point.position.r() - r0).abs() < 1e-3)
        .last()
        .map(|s| s.lambda)
        .unwrap();
    eprintln!("rotating trapped sphere hold time: {hold:.2} r_s");
    assert!(hold > 10.0);
}
