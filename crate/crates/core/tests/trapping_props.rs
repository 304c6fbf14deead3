use mptrap_core::geodesic::{hamiltonian, trapped_sphere, Covector};
use mptrap_core::geometry::BlackHoleParams;
use mptrap_core::trapping::{r_ab, r_ab_oracle, tau_roots, trapped_radius};
use proptest::prelude::*;

fn rho2p(p: &BlackHoleParams, r: f64, th: f64, tau: f64, xi: f64, big_th: f64, phi: f64, psi: f64) -> f64 {
    let x = r * r;
    let k = Covector { tau, xi_x: xi / (2.0 * r), theta: big_th, phi, psi };
    p.rho2(x, th) * hamiltonian(p, x, th, &k)
}

fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let e1 = (4.0 * d2 - d1) / 3.0;
    let e2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * e2 - e1) / 15.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn radial_derivative_identity(
        a in -0.1f64..0.1, b in -0.1f64..0.1,
        r in 1.1f64..3.0, th in 0.1f64..1.4,
        tau in -2.0f64..2.0, xi in -2.0f64..2.0, big_th in -2.0f64..2.0,
        phi in -1.0f64..1.0, psi in -1.0f64..1.0,
    ) {
        let p = BlackHoleParams::new(1.0, a, b).unwrap();
        let x = r * r;
        let delta = p.delta(x);
        let lhs = richardson(|rr| rho2p(&p, rr, th, tau, xi, big_th, phi, psi), r, 1e-3);
        let dq = richardson(|rr| p.delta(rr * rr) / (rr * rr), r, 1e-3);
        let rterm = 2.0 * r * r_ab(&p, x, tau, phi, psi) / (delta * delta);
        let res = lhs - dq * xi * xi + rterm;
        let scale = lhs.abs() + (dq * xi * xi).abs() + rterm.abs() + 1e-300;
        prop_assert!(res.abs() <= 1e-8 * scale, "res {res} scale {scale}");
    }

    #[test]
    fn xi_derivative_identity(
        a in -0.1f64..0.1, b in -0.1f64..0.1,
        r in 1.1f64..3.0, th in 0.1f64..1.4,
        tau in -2.0f64..2.0, xi in -2.0f64..2.0, big_th in -2.0f64..2.0,
        phi in -1.0f64..1.0, psi in -1.0f64..1.0,
    ) {
        let p = BlackHoleParams::new(1.0, a, b).unwrap();
        // quadratic in xi: the central difference is exact up to rounding
        let h = 0.5;
        let d = (rho2p(&p, r, th, tau, xi + h, big_th, phi, psi)
            - rho2p(&p, r, th, tau, xi - h, big_th, phi, psi)) / (2.0 * h);
        let exact = 2.0 * p.delta(r * r) / (r * r) * xi;
        let scale = rho2p(&p, r, th, tau, xi, big_th, phi, psi).abs() + exact.abs() + 1.0;
        prop_assert!((d - exact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn oracle_matches_polynomial(
        a in -0.1f64..0.1, b in -0.1f64..0.1,
        x in 1.3f64..6.0, th in 0.1f64..1.4,
        tau in -2.0f64..2.0, phi in -1.0f64..1.0, psi in -1.0f64..1.0,
    ) {
        let p = BlackHoleParams::new(1.0, a, b).unwrap();
        let o = r_ab_oracle(&p, x, th, tau, phi, psi).unwrap();
        let v = r_ab(&p, x, tau, phi, psi);
        let scale = x.powi(4) * (tau * tau + phi * phi + psi * psi);
        prop_assert!((o - v).abs() <= 1e-8 * scale.max(v.abs()));
    }

    #[test]
    fn trapped_radius_is_zero_homogeneous(
        a in -0.1f64..0.1, b in -0.1f64..0.1,
        tau in prop_oneof![0.5f64..2.0, -2.0f64..-0.5],
        phi in -0.5f64..0.5, psi in -0.5f64..0.5, s in 0.1f64..10.0,
    ) {
        let p = BlackHoleParams::new(1.0, a, b).unwrap();
        let r1 = trapped_radius(&p, tau, phi * tau.abs(), psi * tau.abs()).unwrap();
        let r2 = trapped_radius(&p, s * tau, s * phi * tau.abs(), s * psi * tau.abs()).unwrap();
        prop_assert!((r1.r - r2.r).abs() <= 1e-13);
        let x = r1.r * r1.r;
        prop_assert!(r_ab(&p, x, tau, phi * tau.abs(), psi * tau.abs()).abs() <= 1e-10 * tau * tau);
    }

    #[test]
    fn tau_roots_annihilate_symbol(
        a in -0.1f64..0.1, b in -0.1f64..0.1,
        r in 1.1f64..1.8, th in 0.1f64..1.4,
        xi in -1.0f64..1.0, big_th in -1.0f64..1.0,
        phi in -1.0f64..1.0, psi in -1.0f64..1.0, s in 0.2f64..5.0,
    ) {
        let p = BlackHoleParams::new(1.0, a, b).unwrap();
        let t = tau_roots(&p, r, th, xi, big_th, phi, psi).unwrap();
        prop_assert!(t.tau1 >= t.tau2);
        let norm = 1.0 + xi * xi + big_th * big_th + phi * phi + psi * psi;
        for tau in [t.tau1, t.tau2] {
            let k = Covector { tau, xi_x: xi / (2.0 * r), theta: big_th, phi, psi };
            prop_assert!(hamiltonian(&p, r * r, th, &k).abs() <= 1e-12 * norm * 10.0);
        }
        let ts = tau_roots(&p, r, th, s * xi, s * big_th, s * phi, s * psi).unwrap();
        prop_assert!((ts.tau1 - s * t.tau1).abs() <= 1e-12 * s * norm);
        prop_assert!((ts.tau2 - s * t.tau2).abs() <= 1e-12 * s * norm);
    }
}

#[test]
fn trapped_sphere_and_trapped_radius_agree() {
    for &(a, b, phi, psi) in &[
        (0.05, 0.03, 0.1, -0.05),
        (0.1, -0.1, 0.4, 0.3),
        (-0.08, 0.02, -0.6, 0.2),
        (0.0, 0.0, 0.3, 0.3),
    ] {
        let p = BlackHoleParams::new(1.0, a, b).unwrap();
        let ts = trapped_sphere(&p, phi, psi).unwrap();
        let tr = trapped_radius(&p, -1.0, phi, psi).unwrap();
        assert!((tr.r - ts.x0.sqrt()).abs() < 1e-8, "{a} {b}: {} vs {}", tr.r, ts.x0.sqrt());
    }
}
