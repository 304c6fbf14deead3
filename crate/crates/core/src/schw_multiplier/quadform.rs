//! The bulk quadratic form `Q[u, X, q, m]` as a 4x4 array over
//! `(d_r u, d_v u, |grad_omega u|, u)` and its comparison with the
//! localized-energy weights.

use super::profiles::J;
use super::MultiplierProfile;
use crate::error::{Error, Result};
use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub const UR: usize = 0;
pub const UV: usize = 1;
pub const ANG: usize = 2;
pub const U: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    pub r: f64,
    pub m: [[f64; 4]; 4],
}

impl QuadForm {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.m[i][j])
    }
}

pub fn quadform(p: &MultiplierProfile, r: f64) -> QuadForm {
    let rj = J::var(r);
    let t = p.triple(r);
    let gi = p.chart.inverse_block(rj);
    let (gvv, gvr, grr) = (gi[0][0], gi[0][1], gi[1][1]);
    let (xr, xv) = (t.x_r, t.x_v);
    let (dxr, dxv) = (xr.d(1), xv.d(1));
    let l_vv = xr.val() * gvv.d(1) - 2.0 * gvr.val() * dxv;
    let l_vr = xr.val() * gvr.d(1) - grr.val() * dxv - gvr.val() * dxr;
    let l_rr = xr.val() * grr.d(1) - 2.0 * grr.val() * dxr;
    let rk = rj.powi(p.sp.dim() + 2);
    let div_x = ((rk * xr).deriv() / rk).val();
    let q = t.q.val();
    let c = q - 0.5 * div_x;
    let mut m = [[0.0; 4]; 4];
    m[UR][UR] = -0.5 * l_rr + c * grr.val();
    m[UV][UV] = -0.5 * l_vv + c * gvv.val();
    m[UR][UV] = -0.5 * l_vr + c * gvr.val();
    m[UV][UR] = m[UR][UV];
    m[ANG][ANG] = xr.val() / r + c;
    let m_up_r = gvr * t.m_v + grr * t.m_r;
    let m_up_v = gvv * t.m_v + gvr * t.m_r;
    m[U][UR] = 0.5 * m_up_r.val();
    m[UR][U] = m[U][UR];
    m[U][UV] = 0.5 * m_up_v.val();
    m[UV][U] = m[U][UV];
    let div_m = ((rk * m_up_r).deriv() / rk).val();
    let box_q = p.box_radial(rj, t.q).val();
    m[U][U] = 0.5 * (div_m - box_q);
    QuadForm { r, m }
}

/// Diagonal comparison weights `r^-(d+3)`, `w r^-(d+3)`, `w/r`, `r^-3` with
/// `w = ((r - r_ps)/r)^2`.
pub fn weights(p: &MultiplierProfile, r: f64) -> [f64; 4] {
    let w = ((r - p.sp.r_ps()) / r).powi(2);
    let k = r.powi(-(p.sp.dim() + 3));
    [k, w * k, w / r, r.powi(-3)]
}

/// Largest `c` with `M(r) - c W(r)` positive semidefinite, and the
/// minimizing direction in the original variables.
pub fn local_constant(p: &MultiplierProfile, r: f64) -> (f64, [f64; 4]) {
    let mut rr = r;
    if (rr - p.sp.r_ps()).abs() < 1e-9 * p.sp.r_s {
        rr = p.sp.r_ps() + 1e-9 * p.sp.r_s;
    }
    let q = quadform(p, rr);
    let w = weights(p, rr);
    let s: [f64; 4] = std::array::from_fn(|i| w[i].sqrt().recip());
    let scaled = Matrix4::from_fn(|i, j| q.m[i][j] * s[i] * s[j]);
    let eig = SymmetricEigen::new(scaled);
    let (k, c) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let v = eig.eigenvectors.column(k);
    let mut vec: [f64; 4] = std::array::from_fn(|i| v[i] * s[i]);
    let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    vec.iter_mut().for_each(|x| *x /= norm);
    (c, vec)
}

/// `n` points uniform in `ln r`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub c_star: f64,
    pub min_r: f64,
    pub min_eigvec: [f64; 4],
    pub grid: usize,
    pub params: super::MultiplierConfig,
    pub eps: f64,
    pub mollifier_n: f64,
}

/// Scans `M - c W` over a log-uniform grid; fails when `c_star <= 0`.
pub fn check_positivity(p: &MultiplierProfile, r_lo: f64, r_hi: f64, n: usize) -> Result<PositivityReport> {
    let rep = scan_positivity(p, r_lo, r_hi, n);
    if !(rep.c_star > 0.0) {
        return Err(Error::LemmaViolation { c_star: rep.c_star, r: rep.min_r, eigvec: rep.min_eigvec.to_vec() });
    }
    Ok(rep)
}

/// Like `check_positivity` but returns the report whatever the sign.
pub fn scan_positivity(p: &MultiplierProfile, r_lo: f64, r_hi: f64, n: usize) -> PositivityReport {
    let mut best = (f64::INFINITY, r_lo, [0.0; 4]);
    for r in log_grid(r_lo, r_hi, n) {
        let (c, v) = local_constant(p, r);
        if c < best.0 || c.is_nan() {
            best = (c, r, v);
        }
    }
    PositivityReport {
        c_star: best.0,
        min_r: best.1,
        min_eigvec: best.2,
        grid: n,
        params: p.cfg.clone(),
        eps: p.eps,
        mollifier_n: p.mollifier.n,
    }
}
