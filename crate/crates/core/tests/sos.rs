use mptrap_core::geometry::{BlackHoleParams, SchwParams};
use mptrap_core::schw_multiplier::{MultiplierConfig, MultiplierProfile};
use mptrap_core::sos::{
    mp_bracket, mp_bracket_scan, mu_lower_bound, nu, q_tilde, schw_sos_scan, schw_sos_verify, Region, SymbolPoint,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn profile() -> &'static MultiplierProfile {
    static P: OnceLock<MultiplierProfile> = OnceLock::new();
    P.get_or_init(|| MultiplierProfile::build(SchwParams::new(1.0, 1).unwrap(), MultiplierConfig::default()).unwrap())
}

fn window(samples: usize) -> Region {
    Region { r_lo: 1.2, r_hi: 1.7, samples, ..Default::default() }
}

#[test]
fn sum_of_squares_on_window() {
    let s = schw_sos_scan(profile(), &window(10_000)).unwrap();
    println!("{s:?}");
    assert!(s.residual_max <= 1e-8);
    assert!(s.nu_range[0] > 0.0 && s.nu_range[1] < 1.0);
    assert!(s.lambda_defect_max <= 1e-12);
}

#[test]
fn q_tilde_vanishes_quadratically() {
    let p = profile();
    let rps = p.sp.r_ps();
    let mut c: f64 = 0.0;
    for i in 0..=1000 {
        let r = 1.2 + 0.5 * i as f64 / 1000.0;
        if (r - rps).abs() > 1e-3 {
            c = c.max(q_tilde(p, r).abs() / (r - rps).powi(2));
        }
    }
    for &z in &[1e-2, 3e-3, 1.5e-3] {
        assert!(q_tilde(p, rps + z).abs() <= c * z * z * 1.0001);
    }
    assert!(c.is_finite() && c < 10.0, "{c}");
}

#[test]
fn bracket_scan_at_small_rotation() {
    let bh = BlackHoleParams::new(1.0, 0.03, 0.03).unwrap();
    let (s, rows) = mp_bracket_scan(&bh, profile(), &window(100_000)).unwrap();
    println!("{:?}", s);
    assert_eq!(rows.len(), 100_000);
    assert!(s.bracket_min >= -1e-10);
    assert!(s.tube_ratio_min > 0.0);
    assert!(s.alpha_min > 0.0 && s.beta_min > 0.0);
    assert!(s.residual_max < 1e-10);
}

#[test]
fn bracket_reduces_to_tangherlini() {
    let bh = BlackHoleParams::new(1.0, 0.0, 0.0).unwrap();
    let p = profile();
    let (_, rows) = mp_bracket_scan(&bh, p, &window(2000)).unwrap();
    for row in rows {
        let s = schw_sos_verify(p, &SymbolPoint {
            r: row.r,
            theta: row.theta,
            tau: row.tau,
            xi: row.xi,
            big_theta: row.big_theta,
            phi: row.phi,
            psi: row.psi,
            azimuths: [0.0; 2],
        })
        .unwrap();
        let schw = s.alpha_s2 * row.tau * row.tau + s.beta_s2 * row.xi * row.xi;
        assert!((row.bracket - schw).abs() <= 1e-10 * schw.abs().max(1.0), "{} {}", row.bracket, schw);
    }
}

#[test]
fn mu_bound_default_region() {
    let bh = BlackHoleParams::new(1.0, 0.03, 0.03).unwrap();
    let m = mu_lower_bound(&bh, profile(), &Region::default(), 0.05).unwrap();
    println!("{m:?}");
    assert!(m.c_band[0] <= m.c_band[1]);
    assert!(m.kappa > 0.0);
}

#[test]
fn mu_envelope_scales_with_eps0() {
    let p = profile();
    let region = Region { samples: 4000, ..Default::default() };
    let mut ratios = vec![];
    for eps0 in [0.0125, 0.025, 0.05] {
        let bh = BlackHoleParams::new(1.0, 0.6 * eps0, 0.6 * eps0).unwrap();
        let m = mu_lower_bound(&bh, p, &region, eps0).unwrap();
        ratios.push(m.envelope / eps0);
    }
    println!("{ratios:?}");
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 2.0);
}

#[test]
fn mu_tangherlini_limit() {
    let bh = BlackHoleParams::new(1.0, 0.0, 0.0).unwrap();
    let region = Region { samples: 2000, ..Default::default() };
    let m = mu_lower_bound(&bh, profile(), &region, 1e-3).unwrap();
    println!("{m:?}");
    assert_eq!(m.c_big, 0.0);
    assert!(m.envelope == 0.0);
    assert!(m.schw_reconstruction.unwrap() < 1e-10);
}

#[test]
fn nu_inside_unit_interval() {
    let p = profile();
    for i in 0..=2000 {
        let r = 1.2 + 0.5 * i as f64 / 2000.0;
        let v = nu(p, r);
        assert!(v > 0.0 && v < 1.0, "nu({r}) = {v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kappa_is_scale_invariant(s in 0.1f64..10.0, seed in 0u64..1000) {
        let bh = BlackHoleParams::new(1.0, 0.03, 0.02).unwrap();
        let region = Region { samples: 3, seed, ..Default::default() };
        let m = mu_lower_bound(&bh, profile(), &region, 0.05).unwrap();
        let w = m.witness;
        let scaled = SymbolPoint { tau: s * w.tau, xi: s * w.xi, big_theta: s * w.big_theta, phi: s * w.phi, psi: s * w.psi, ..w };
        let b1 = mp_bracket(&bh, profile(), &on_shell(&bh, w)).unwrap();
        let b2 = mp_bracket(&bh, profile(), &on_shell(&bh, scaled)).unwrap();
        prop_assert!((b2.bracket - s * s * b1.bracket).abs() <= 1e-9 * (s * s * b1.bracket.abs()).max(1e-12));
    }
}

fn on_shell(bh: &BlackHoleParams, pt: SymbolPoint) -> SymbolPoint {
    let t = mptrap_core::trapping::tau_roots(bh, pt.r, pt.theta, pt.xi, pt.big_theta, pt.phi, pt.psi).unwrap();
    SymbolPoint { tau: t.tau1, ..pt }
}
