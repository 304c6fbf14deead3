//! Boundary fluxes of `P[u, X + C K, q, m]` on the slices `v~ = const` and
//! on the lateral boundary `r = r_e`, plus the discrete Hardy constant.

use super::profiles::J;
use super::quadform::{log_grid, ANG, U, UR, UV};
use super::MultiplierProfile;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix3, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxForm {
    pub r: f64,
    /// `-<dv~, P>` over `(d_r u, d_v u, |grad_omega u|, u)`.
    pub slice: [[f64; 4]; 4],
    /// `<dr, P>`.
    pub lateral: [[f64; 4]; 4],
}

fn sym(a: [f64; 4], b: [f64; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| 0.5 * (a[i] * b[j] + a[j] * b[i]))
}

fn to_array(m: Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

pub fn flux_forms(p: &MultiplierProfile, c_energy: f64, r: f64) -> FluxForm {
    let rj = J::var(r);
    let t = p.triple(r);
    let gi = p.chart.inverse_block(rj);
    let (gvv, gvr, grr) = (gi[0][0].val(), gi[0][1].val(), gi[1][1].val());
    let (yv, yr) = (t.x_v.val() + c_energy, t.x_r.val());
    let q = t.q.val();
    let dq = t.q.d(1);
    let m_up_v = gvv * t.m_v.val() + gvr * t.m_r.val();
    let m_up_r = gvr * t.m_v.val() + grr * t.m_r.val();
    let mut e_u = [0.0; 4];
    e_u[U] = 1.0;
    let mut yu = [0.0; 4];
    yu[UR] = yr;
    yu[UV] = yv;
    let mut up_v = [0.0; 4];
    up_v[UR] = gvr;
    up_v[UV] = gvv;
    let mut up_r = [0.0; 4];
    up_r[UR] = grr;
    up_r[UV] = gvr;
    let mut grad2 = Matrix4::zeros();
    grad2[(UR, UR)] = grr;
    grad2[(UV, UV)] = gvv;
    grad2[(UR, UV)] = gvr;
    grad2[(UV, UR)] = gvr;
    grad2[(ANG, ANG)] = 1.0;
    let mut uu = Matrix4::zeros();
    uu[(U, U)] = 1.0;
    let p_v = sym(up_v, yu) - grad2 * (0.5 * yv) + sym(e_u, up_v) * q + uu * (0.5 * (m_up_v - gvr * dq));
    let p_r = sym(up_r, yu) - grad2 * (0.5 * yr) + sym(e_u, up_r) * q + uu * (0.5 * (m_up_r - grr * dq));
    FluxForm { r, slice: to_array(-p_v), lateral: to_array(p_r) }
}

fn deriv_block(m: &[[f64; 4]; 4]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub c_energy: f64,
    pub r_e: f64,
    pub grid: usize,
    /// Extreme eigenvalues of the slice derivative block against
    /// `u_r^2 + u_v^2 + |grad_omega u|^2`.
    pub slice_lo: f64,
    pub slice_hi: f64,
    pub slice_lo_r: f64,
    /// `sqrt(slice_hi / slice_lo)`, infinite when `slice_lo <= 0`.
    pub kappa: f64,
    /// Same against `C (u_v^2 + max(A, 0) u_r^2 + |grad_omega u|^2) + u_r^2`.
    pub kappa_weighted: f64,
    /// `kappa` restricted to `r >= r_s`.
    pub kappa_exterior: f64,
    pub lateral_min_eig: f64,
    pub lateral_eigvec: [f64; 4],
    pub hardy_constant: f64,
    pub hardy_bound: f64,
}

fn extreme_eigs(m: Matrix3<f64>) -> (f64, f64) {
    let e = SymmetricEigen::new(m).eigenvalues;
    (e.min(), e.max())
}

fn kappa(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        (hi / lo).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Lowest eigenvalue of the lateral form and its eigenvector.
pub fn lateral_min(p: &MultiplierProfile, c_energy: f64, r_e: f64) -> (f64, [f64; 4]) {
    let lat = flux_forms(p, c_energy, r_e).lateral;
    let eig = SymmetricEigen::new(Matrix4::from_fn(|i, j| lat[i][j]));
    let k = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(k);
    (eig.eigenvalues[k], std::array::from_fn(|i| v[i]))
}

pub fn boundary_report(p: &MultiplierProfile, c_energy: f64, r_e: f64, n: usize) -> BoundaryReport {
    let mut lo = (f64::INFINITY, r_e);
    let mut hi = f64::NEG_INFINITY;
    let (mut wlo, mut whi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in log_grid(r_e, p.chart.r_max, n) {
        let s = deriv_block(&flux_forms(p, c_energy, r).slice);
        let (a, b) = extreme_eigs(s);
        if a < lo.0 {
            lo = (a, r);
        }
        hi = hi.max(b);
        if r >= p.sp.r_s {
            xlo = xlo.min(a);
            xhi = xhi.max(b);
        }
        let ap = p.sp.a_fn(r).max(0.0);
        let w = [c_energy * ap + 1.0, c_energy, c_energy];
        let sc = Matrix3::from_fn(|i, j| s[(i, j)] / (w[i] * w[j]).sqrt());
        let (a, b) = extreme_eigs(sc);
        wlo = wlo.min(a);
        whi = whi.max(b);
    }
    let (lat, vec) = lateral_min(p, c_energy, r_e);
    let d = p.sp.d as f64;
    BoundaryReport {
        c_energy,
        r_e,
        grid: n,
        slice_lo: lo.0,
        slice_hi: hi,
        slice_lo_r: lo.1,
        kappa: kappa(lo.0, hi),
        kappa_weighted: kappa(wlo, whi),
        kappa_exterior: kappa(xlo, xhi),
        lateral_min_eig: lat,
        lateral_eigvec: vec,
        hardy_constant: hardy_constant(d, r_e, p.chart.r_max, 400),
        hardy_bound: 4.0 / ((d + 1.0) * (d + 1.0)),
    }
}

/// Report plus the pass/fail verdict: `kappa < kappa_max` and a positive
/// definite lateral form.
pub fn boundary_forms(
    p: &MultiplierProfile,
    c_energy: f64,
    r_e: f64,
    n: usize,
    kappa_max: f64,
) -> Result<BoundaryReport> {
    let rep = boundary_report(p, c_energy, r_e, n);
    if !(rep.kappa < kappa_max) || !(rep.lateral_min_eig > 0.0) {
        return Err(Error::BoundaryFormFailure(format!(
            "C = {c_energy}, r_e = {r_e}: slice eigenvalues [{:.4e}, {:.4e}] (min at r = {:.6}), kappa = {:.4e}, \
             lateral min eigenvalue = {:.4e}",
            rep.slice_lo, rep.slice_hi, rep.slice_lo_r, rep.kappa, rep.lateral_min_eig
        )));
    }
    Ok(rep)
}

/// Largest `r_s - r_e` (bisection below `r_s`) at which the lateral form is
/// positive definite.
pub fn lateral_depth(p: &MultiplierProfile, c_energy: f64) -> f64 {
    let rs = p.sp.r_s;
    let ok = |gap: f64| lateral_min(p, c_energy, rs - gap).0 > 0.0;
    let (mut good, mut bad) = (1e-14 * rs, 0.5 * rs);
    if ok(bad) {
        return bad;
    }
    if !ok(good) {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = (good * bad).sqrt();
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
        if bad / good < 1.0 + 1e-6 {
            break;
        }
    }
    good
}

/// Best constant in `int r^-2 u^2 r^(d+2) dr <= C int u_r^2 r^(d+2) dr`
/// over piecewise-linear `u` on `[r_e, r_max]` vanishing at `r_max`.
pub fn hardy_constant(d: f64, r_e: f64, r_max: f64, n: usize) -> f64 {
    let nodes = log_grid(r_e, r_max, n + 1);
    let m = n;
    let mut mass = DMatrix::<f64>::zeros(m, m);
    let mut stiff = DMatrix::<f64>::zeros(m, m);
    let gauss3 = [(-0.7745966692414834, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.7745966692414834, 5.0 / 9.0)];
    for e in 0..n {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let hl = b - a;
        let mut me = [[0.0; 2]; 2];
        let mut ke = [[0.0; 2]; 2];
        for &(x, w) in &gauss3 {
            let r = a + 0.5 * hl * (x + 1.0);
            let jac = 0.5 * hl * w;
            let phi = [0.5 * (1.0 - x), 0.5 * (1.0 + x)];
            let dphi = [-1.0 / hl, 1.0 / hl];
            for i in 0..2 {
                for j in 0..2 {
                    me[i][j] += jac * phi[i] * phi[j] * r.powf(d);
                    ke[i][j] += jac * dphi[i] * dphi[j] * r.powf(d + 2.0);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let (gi, gj) = (e + i, e + j);
                if gi < m && gj < m {
                    mass[(gi, gj)] += me[i][j];
                    stiff[(gi, gj)] += ke[i][j];
                }
            }
        }
    }
    let l = match stiff.cholesky() {
        Some(c) => c.l(),
        None => return f64::NAN,
    };
    let linv = match l.try_inverse() {
        Some(x) => x,
        None => return f64::NAN,
    };
    let sym = &linv * mass * linv.transpose();
    SymmetricEigen::new(sym).eigenvalues.max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_constant_below_classical() {
        let c = hardy_constant(1.0, 0.95, 50.0, 200);
        assert!(c > 0.5 && c <= 1.0 + 1e-12, "{c}");
    }
}
