//! Symbol-level trapping: the polynomial `R_{a,b}`, its root `r_{a,b}`,
//! the factorization of `p` in `tau` and the cutoffs `c_i`.

use crate::error::{Error, Result};
use crate::geodesic::{hamiltonian, Covector};
use crate::geometry::{self, BlackHoleParams, PHI, PSI, T, TH, X};
use crate::numerics::{roots, smooth, Jet, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Coefficients of `R` as a quadratic form in `(tau, Phi, Psi)`, each a
/// polynomial in `x`: `[tt, tPhi, tPsi, PhiPhi, PsiPsi, PhiPsi]`.
fn r_coefficients<S: Scalar>(p: &BlackHoleParams, x: S) -> [S; 6] {
    let (a, b, rs2) = (p.a, p.b, p.r_s * p.r_s);
    let (a2, b2) = (a * a, b * b);
    let xb = x + b2;
    let xa = x + a2;
    let x2 = x * x;
    let tt = x2 * xb * (xb - 2.0 * rs2)
        + xb * xb * (a2 * a2)
        + ((x2 * 4.0 - x * (2.0 * rs2) + rs2 * rs2) * b2 + x2 * (x - rs2) * 2.0 + x * (2.0 * b2 * b2)) * a2;
    let tphi = (x2 + (x * 2.0 - rs2) * b2 + b2 * b2) * (2.0 * a * rs2);
    let tpsi = (x2 + (x * 2.0 - rs2) * a2 + a2 * a2) * (2.0 * b * rs2);
    let phiphi = (x2 + x * (2.0 * (b2 - rs2)) + (rs2 - b2) * (rs2 - b2)) * b2 - xb * xb * a2;
    let psipsi = (x2 + x * (2.0 * (a2 - rs2)) + (rs2 - a2) * (rs2 - a2)) * a2 - xa * xa * b2;
    let phipsi = (x * 2.0 - rs2 + a2 + b2) * (-2.0 * a * b * rs2);
    [tt, tphi, tpsi, phiphi, psipsi, phipsi]
}

/// `R_{a,b}(x, tau, Phi, Psi)`, quartic in `x`.
pub fn r_ab<S: Scalar>(p: &BlackHoleParams, x: S, tau: f64, phi: f64, psi: f64) -> S {
    let c = r_coefficients(p, x);
    c[0] * (tau * tau) + c[1] * (tau * phi) + c[2] * (tau * psi) + c[3] * (phi * phi) + c[4] * (psi * psi)
        + c[5] * (phi * psi)
}

/// `d R / dx` by exact differentiation of the quartic.
pub fn r_ab_dx(p: &BlackHoleParams, x: f64, tau: f64, phi: f64, psi: f64) -> f64 {
    let (a, b, rs2) = (p.a, p.b, p.r_s * p.r_s);
    let (a2, b2) = (a * a, b * b);
    let xb = x + b2;
    let xa = x + a2;
    let tt = 2.0 * x * xb * (xb - 2.0 * rs2)
        + x * x * (xb - 2.0 * rs2)
        + x * x * xb
        + 2.0 * a2 * a2 * xb
        + a2 * (b2 * (8.0 * x - 2.0 * rs2) + 6.0 * x * x - 4.0 * rs2 * x + 2.0 * b2 * b2);
    let tphi = 2.0 * a * rs2 * (2.0 * x + 2.0 * b2);
    let tpsi = 2.0 * b * rs2 * (2.0 * x + 2.0 * a2);
    let phiphi = b2 * (2.0 * x + 2.0 * (b2 - rs2)) - 2.0 * a2 * xb;
    let psipsi = a2 * (2.0 * x + 2.0 * (a2 - rs2)) - 2.0 * b2 * xa;
    let phipsi = -4.0 * a * b * rs2;
    tt * tau * tau + tphi * tau * phi + tpsi * tau * psi + phiphi * phi * phi + psipsi * psi * psi
        + phipsi * phi * psi
}

/// `-Delta^2 d_x(rho^2 p)` at `Xi = Theta = 0`, by Richardson-extrapolated
/// central differences of the assembled symbol.
pub fn r_ab_oracle(p: &BlackHoleParams, x: f64, th: f64, tau: f64, phi: f64, psi: f64) -> Result<f64> {
    let delta = p.delta(x);
    if delta == 0.0 {
        return Err(Error::OracleFailure(format!("Delta = 0 at x = {x}")));
    }
    let k = Covector { tau, xi_x: 0.0, theta: 0.0, phi, psi };
    let f = |xx: f64| p.rho2(xx, th) * hamiltonian(p, xx, th, &k);
    let h0 = 1e-2 * x.abs().max(1.0);
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    // three-level Richardson table
    let (d1, d2, d3) = (d(h0), d(h0 / 2.0), d(h0 / 4.0));
    let e1 = (4.0 * d2 - d1) / 3.0;
    let e2 = (4.0 * d3 - d2) / 3.0;
    let der = (16.0 * e2 - e1) / 15.0;
    if !der.is_finite() {
        return Err(Error::OracleFailure(format!("non-finite difference at x = {x}")));
    }
    Ok(-delta * delta * der)
}

/// `rho^2 p` as a jet in `r` at fixed `theta` and covector
/// `(tau, xi, Theta, Phi, Psi)`, `xi` dual to `r`.
pub fn rho2_p_jet(params: &BlackHoleParams, r: f64, theta: f64, k: [f64; 5]) -> Jet<2> {
    let r = Jet::<2>::var(r);
    let x = r * r;
    let th = Jet::<2>::cst(theta);
    let g = geometry::contravariant(params, x, th);
    let mut cov = [Jet::cst(0.0); 5];
    cov[T] = Jet::cst(k[0]);
    cov[X] = r.recip() * (k[1] * 0.5);
    cov[TH] = Jet::cst(k[2]);
    cov[PHI] = Jet::cst(k[3]);
    cov[PSI] = Jet::cst(k[4]);
    let mut h = Jet::cst(0.0);
    for i in 0..5 {
        for j in 0..5 {
            h += g[i][j] * cov[i] * cov[j];
        }
    }
    params.rho2(x, th) * h
}

/// Relative residual of `d_r(rho^2 p) = -2 r R / Delta^2 + d_r(Delta / r^2) xi^2`,
/// the left side differentiated exactly.
pub fn rderiv_residual(params: &BlackHoleParams, r: f64, theta: f64, k: [f64; 5]) -> f64 {
    let lhs = rho2_p_jet(params, r, theta, k).d(1);
    let rj = Jet::<2>::var(r);
    let dq = (params.delta(rj * rj) / (rj * rj)).d(1) * k[1] * k[1];
    let x = r * r;
    let delta = params.delta(x);
    let rterm = -2.0 * r * r_ab(params, x, k[0], k[3], k[4]) / (delta * delta);
    let scale = lhs.abs() + dq.abs() + rterm.abs() + f64::MIN_POSITIVE;
    (lhs - rterm - dq).abs() / scale
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RderivScan {
    pub samples: usize,
    pub residual_max: f64,
    /// `(a, b, r, theta, tau, xi, Theta, Phi, Psi)` at the largest residual.
    pub witness: [f64; 9],
}

/// [`rderiv_residual`] at random `|a|, |b| <= ab_max r_s`, `r` in
/// `r_range r_s`, `theta` in `(0, pi/2)` and covectors in `[-1, 1]^5`.
pub fn rderiv_scan(r_s: f64, ab_max: f64, r_range: [f64; 2], samples: usize, seed: u64) -> Result<RderivScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RderivScan { samples, residual_max: 0.0, witness: [0.0; 9] };
    let mut done = 0;
    while done < samples {
        let a = rng.random_range(-ab_max..=ab_max) * r_s;
        let b = rng.random_range(-ab_max..=ab_max) * r_s;
        let r = rng.random_range(r_range[0]..=r_range[1]) * r_s;
        let th = rng.random_range(1e-3..std::f64::consts::FRAC_PI_2 - 1e-3);
        let k: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let Ok(p) = BlackHoleParams::new(r_s, a, b) else { continue };
        if p.delta(r * r) <= 0.0 {
            continue;
        }
        let res = rderiv_residual(&p, r, th, k);
        if !(res <= out.residual_max) {
            out.residual_max = res;
            out.witness = [a, b, r, th, k[0], k[1], k[2], k[3], k[4]];
        }
        done += 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrappedRadius {
    pub r: f64,
    pub dr_dr: f64,
    pub newton_iters: usize,
}

/// Simple root `r_{a,b}(tau, Phi, Psi)` of `R` near the photon sphere.
pub fn trapped_radius(p: &BlackHoleParams, tau: f64, phi: f64, psi: f64) -> Result<TrappedRadius> {
    let f = |r: f64| {
        let x = r * r;
        (r_ab(p, x, tau, phi, psi), 2.0 * r * r_ab_dx(p, x, tau, phi, psi))
    };
    let rs = p.r_s;
    let seed = std::f64::consts::SQRT_2 * rs;
    match roots::newton_bracketed(f, 1.1 * rs, 1.8 * rs, seed, 1e-15 * rs, 100) {
        Some((r, it)) => Ok(TrappedRadius { r, dr_dr: f(r).1, newton_iters: it }),
        None => Err(Error::NoRoot(format!("tau = {tau}, Phi = {phi}, Psi = {psi}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauRoots {
    pub tau1: f64,
    pub tau2: f64,
}

/// Roots of `p = 0` as a quadratic in `tau`, with `tau1 >= tau2`. The
/// spatial covector is given with the r-dual `xi`.
pub fn tau_roots(
    p: &BlackHoleParams,
    r: f64,
    th: f64,
    xi: f64,
    theta_mom: f64,
    phi: f64,
    psi: f64,
) -> Result<TauRoots> {
    let x = r * r;
    let g = geometry::contravariant(p, x, th);
    let spatial = Covector { tau: 0.0, xi_x: xi / (2.0 * r), theta: theta_mom, phi, psi };
    let qa = g[T][T];
    let qb = 2.0 * (g[T][PHI] * phi + g[T][PSI] * psi);
    let qc = hamiltonian(p, x, th, &spatial);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::ComplexRoots { r });
    }
    let rts = roots::quadratic(qc, qb, qa);
    Ok(TauRoots { tau1: rts[1], tau2: rts[0] })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub c1: f64,
    pub c2: f64,
    pub freq_scale: f64,
}

/// `c_i = chi(L) chi(L |r - r_{a,b}(tau_i)| / r_s)` with `chi` vanishing on
/// `[0, 1]` and equal to 1 on `[2, inf)`, `L = freq_scale`.
pub fn trapping_cutoffs(
    p: &BlackHoleParams,
    r: f64,
    th: f64,
    k: &Covector,
    freq_scale: f64,
) -> Result<CutoffSpec> {
    let xi = k.xi_r(r * r);
    let tr = tau_roots(p, r, th, xi, k.theta, k.phi, k.psi)?;
    let low = smooth::chi_ge1(freq_scale);
    let c = |tau: f64| -> Result<f64> {
        let rt = trapped_radius(p, tau, k.phi, k.psi)?.r;
        Ok(low * smooth::chi_ge1(freq_scale * (r - rt).abs() / p.r_s))
    };
    Ok(CutoffSpec { c1: c(tr.tau1)?, c2: c(tr.tau2)?, freq_scale })
}

/// Sup of `|Phi/tau|` and `|Psi/tau|` over null covectors in the window,
/// sampled on a grid of positions and unit spatial directions, padded by 10%.
pub fn measure_c_mp(p: &BlackHoleParams, r_lo: f64, r_hi: f64, n: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let r = r_lo + (r_hi - r_lo) * i as f64 / n as f64;
        for j in 1..n {
            let th = std::f64::consts::FRAC_PI_2 * j as f64 / n as f64;
            for k in 0..(4 * n) {
                let ang = std::f64::consts::TAU * k as f64 / (4 * n) as f64;
                let (phi, psi) = (ang.cos(), ang.sin());
                let tr = tau_roots(p, r, th, 0.0, 0.0, phi, psi)?;
                for tau in [tr.tau1, tr.tau2] {
                    if tau != 0.0 {
                        sup = sup.max(phi.abs() / tau.abs()).max(psi.abs() / tau.abs());
                    }
                }
            }
        }
    }
    Ok(1.1 * sup)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Psi")]
    pub psi: f64,
    pub r_trapped: f64,
    #[serde(rename = "dR_dr")]
    pub dr_dr: f64,
    pub newton_iters: usize,
}

/// Trapped radii over a grid of rotation parameters and unit-`tau`
/// covectors in the cone `|Phi|, |Psi| <= c_mp`.
pub fn trapped_scan(r_s: f64, ab: &[(f64, f64)], c_mp: f64, n: usize) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for &(a, b) in ab {
        let p = BlackHoleParams::new(r_s, a, b)?;
        for tau in [1.0, -1.0] {
            for i in 0..=n {
                for j in 0..=n {
                    let phi = c_mp * (2.0 * i as f64 / n.max(1) as f64 - 1.0);
                    let psi = c_mp * (2.0 * j as f64 / n.max(1) as f64 - 1.0);
                    let t = trapped_radius(&p, tau, phi, psi)?;
                    rows.push(ScanRow { a, b, tau, phi, psi, r_trapped: t.r, dr_dr: t.dr_dr, newton_iters: t.newton_iters });
                }
            }
        }
    }
    Ok(rows)
}

/// Smallest `|dR/dr|` at the root, normalized by `|tau|^2 r_s^7`.
pub fn simplicity_bound(rows: &[ScanRow], r_s: f64) -> f64 {
    rows.iter()
        .map(|r| r.dr_dr.abs() / (r.tau * r.tau * r_s.powi(7)))
        .fold(f64::INFINITY, f64::min)
}

pub fn write_scan_csv(path: &std::path::Path, rows: &[ScanRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Io { path: path.display().to_string(), reason: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })
}
