use super::evolve::History;
use super::operator::{d1_fourth, ModeOperator};
use crate::numerics::quad::trapezoid;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub v: Vec<f64>,
    pub e_slice: Vec<f64>,
    /// Cumulative `E[u]` through `r = r_e` at the snapshot times.
    pub e_lateral_cum: Vec<f64>,
    pub e_initial: f64,
    pub e_lateral: f64,
    pub sup_e: f64,
    /// `int Q(grad r, grad r) r_e^(d+2) dv~`, the flux of the energy
    /// current along the future timelike `-grad r`.
    pub flux_lateral: f64,
    /// Smallest value of that integrand over all steps.
    pub flux_integrand_min: f64,
}

/// `2^(-j/2)`-weighted `L^2` norms over `[2^(j-1), 2^j]` clipped to the
/// domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusNorm {
    pub j: i32,
    pub r_lo: f64,
    pub r_hi: f64,
    pub u_r: f64,
    pub w_s: f64,
    pub angular_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub r: f64,
    /// Time-integrated `((r - r_ps)/r)^2 (w^2 + |grad_omega u|^2) r^(d+2)`.
    pub weighted: f64,
    pub unweighted: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    #[serde(rename = "LE1_S")]
    pub le1_s: f64,
    /// `None` when the forcing is unbounded in the weighted norm.
    #[serde(rename = "LEstar_S")]
    pub le_star_s: Option<f64>,
    pub u_r_le: f64,
    pub w_le_s: f64,
    pub angular_le_s: f64,
    pub hardy_l2: f64,
    pub annuli: Vec<AnnulusNorm>,
    pub density: Vec<DensitySample>,
    /// Largest `||r^-3/2 u||^2 / ||d_r u||^2` over the snapshots.
    pub hardy_ratio_max: f64,
}

fn rk(op: &ModeOperator) -> Vec<f64> {
    let k = op.sp.dim() + 2;
    op.r.iter().map(|r| r.powi(k)).collect()
}

/// `int (u_r^2 + w^2 + lambda u^2 / r^2) r^(d+2) dr` by the trapezoid rule
/// with fourth-order `u_r`.
pub fn slice_energy(op: &ModeOperator, u: &[f64], w: &[f64]) -> f64 {
    let ur = d1_fourth(u, op.spacing);
    let vals: Vec<f64> = op
        .r
        .iter()
        .enumerate()
        .map(|(i, &r)| (ur[i] * ur[i] + w[i] * w[i] + op.lambda * u[i] * u[i] / (r * r)) * r.powi(op.sp.dim() + 2))
        .collect();
    trapezoid(&vals, op.spacing)
}

/// Integral over `[lo, hi]` of the piecewise-linear interpolant of `vals`.
fn integral_between(grid: &[f64], vals: &[f64], lo: f64, hi: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (x0, x1) = (a.max(lo), b.min(hi));
        if x1 <= x0 {
            continue;
        }
        let at = |x: f64| vals[i] + (vals[i + 1] - vals[i]) * (x - a) / (b - a);
        s += 0.5 * (x1 - x0) * (at(x0) + at(x1));
    }
    s
}

/// Trapezoid weights for possibly non-uniform sample times.
fn trapezoid_weights(v: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; v.len()];
    for i in 1..v.len() {
        let h = 0.5 * (v[i] - v[i - 1]);
        c[i - 1] += h;
        c[i] += h;
    }
    c
}

fn time_integral(v: &[f64], vals: &[f64]) -> f64 {
    v.windows(2).zip(vals.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum()
}

pub fn diagnostics(hist: &History, op: &ModeOperator) -> (EnergyReport, NormReport) {
    let n = op.len();
    let rps = op.sp.r_ps();
    let lam = op.lambda;
    let rkv = rk(op);
    let omega2: Vec<f64> = op.r.iter().map(|r| ((r - rps) / r).powi(2)).collect();

    let cw = trapezoid_weights(&hist.v);
    let mut e_slice = Vec::with_capacity(hist.snapshots.len());
    let mut t = vec![vec![0.0; n]; 5];
    let mut hardy_ratio_max = 0.0f64;
    for (s, &c) in hist.snapshots.iter().zip(&cw) {
        e_slice.push(slice_energy(op, &s.u, &s.w));
        let ur = d1_fourth(&s.u, op.spacing);
        let (mut num, mut den) = (vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let r = op.r[i];
            let ang = lam * s.u[i] * s.u[i] / (r * r);
            let d = [
                ur[i] * ur[i] * rkv[i],
                omega2[i] * s.w[i] * s.w[i] * rkv[i],
                omega2[i] * ang * rkv[i],
                s.u[i] * s.u[i] * rkv[i] / (r * r * r),
                (s.w[i] * s.w[i] + ang) * rkv[i],
            ];
            for (acc, x) in t.iter_mut().zip(d) {
                acc[i] += c * x;
            }
            num[i] = d[3];
            den[i] = d[0];
        }
        let den = trapezoid(&den, op.spacing);
        if den > 0.0 {
            hardy_ratio_max = hardy_ratio_max.max(trapezoid(&num, op.spacing) / den);
        }
    }

    let lo = op.r[0];
    let hi = op.r[n - 1];
    let j0 = lo.log2().floor() as i32 + 1;
    let j1 = hi.log2().ceil() as i32;
    let mut annuli = vec![];
    let (mut le_ur, mut le_w, mut le_ang) = (0.0f64, 0.0f64, 0.0f64);
    for j in j0..=j1.max(j0) {
        let a = 2f64.powi(j - 1).max(lo);
        let b = 2f64.powi(j).min(hi);
        if b <= a {
            continue;
        }
        let sc = 2f64.powf(-0.5 * j as f64);
        let norm = |x: &Vec<f64>| sc * integral_between(&op.r, x, a, b).max(0.0).sqrt();
        let an = AnnulusNorm { j, r_lo: a, r_hi: b, u_r: norm(&t[0]), w_s: norm(&t[1]), angular_s: norm(&t[2]) };
        le_ur = le_ur.max(an.u_r);
        le_w = le_w.max(an.w_s);
        le_ang = le_ang.max(an.angular_s);
        annuli.push(an);
    }
    let hardy_l2 = trapezoid(&t[3], op.spacing).max(0.0).sqrt();
    let le1_s = le_ur + le_w + le_ang + hardy_l2;

    let le_star_s = if hist.forcing.is_empty() {
        Some(0.0)
    } else {
        let mut tf = vec![0.0; n];
        for (f, &c) in hist.forcing.iter().zip(&cw) {
            for i in 0..n {
                tf[i] += c * f[i] * f[i] / omega2[i] * rkv[i];
            }
        }
        let mut s = 0.0;
        for an in &annuli {
            s += 2f64.powf(0.5 * an.j as f64) * integral_between(&op.r, &tf, an.r_lo, an.r_hi).max(0.0).sqrt();
        }
        s.is_finite().then_some(s)
    };

    let density = (0..n)
        .map(|i| DensitySample { r: op.r[i], weighted: t[1][i] + t[2][i], unweighted: t[4][i] })
        .collect();

    let re = op.r[0];
    let rke = rkv[0];
    let (b, a) = (op.g_vr[0], op.g_rr[0]);
    let h = 1.0 / op.inv_h[0];
    let mut e_lat_int = Vec::with_capacity(hist.trace.len());
    let mut flux_int = Vec::with_capacity(hist.trace.len());
    for tr in &hist.trace {
        let ang = lam * tr.u * tr.u / (re * re);
        e_lat_int.push((tr.u_r * tr.u_r + tr.w * tr.w + ang) * rke);
        let dr_du = b * tr.w + a * tr.u_r;
        let grad2 = -h * tr.w * tr.w + 2.0 * b * tr.w * tr.u_r + a * tr.u_r * tr.u_r + ang;
        flux_int.push((dr_du * dr_du - 0.5 * a * grad2) * rke);
    }
    let tv: Vec<f64> = hist.trace.iter().map(|x| x.v).collect();
    let mut e_lateral_cum = Vec::with_capacity(hist.v.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (i, &v) in tv.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * (v - tv[i - 1]) * (e_lat_int[i] + e_lat_int[i - 1]);
        }
        while next < hist.v.len() && hist.v[next] <= v + 1e-12 * v.abs().max(1.0) {
            e_lateral_cum.push(acc);
            next += 1;
        }
    }
    let energy = EnergyReport {
        e_initial: e_slice.first().copied().unwrap_or(0.0),
        sup_e: e_slice.iter().copied().fold(0.0, f64::max),
        e_lateral: acc,
        flux_lateral: time_integral(&tv, &flux_int),
        flux_integrand_min: flux_int.iter().copied().fold(f64::INFINITY, f64::min),
        v: hist.v.clone(),
        e_slice,
        e_lateral_cum,
    };
    let norms = NormReport {
        le1_s,
        le_star_s,
        u_r_le: le_ur,
        w_le_s: le_w,
        angular_le_s: le_ang,
        hardy_l2,
        annuli,
        density,
        hardy_ratio_max,
    };
    (energy, norms)
}

/// `(E[u](Sigma+) + sup E[u](v~) + ||u||^2_LE1_S) / E[u](0)`.
pub fn observed_constant(e: &EnergyReport, n: &NormReport) -> f64 {
    (e.e_lateral + e.sup_e + n.le1_s * n.le1_s) / e.e_initial
}
