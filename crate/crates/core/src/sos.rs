//! Symbol identities near the photon sphere: the Tangherlini sum of
//! squares, the Myers-Perry bracket and the `mu_j` lower bound.

use crate::error::{Error, Result};
use crate::geometry::BlackHoleParams;
use crate::numerics::Jet;
use crate::schw_multiplier::profiles::J;
use crate::schw_multiplier::MultiplierProfile;
use crate::trapping::{r_ab, tau_roots, trapped_radius};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A phase-space point with the spatial covector in `(r, theta, phi, psi)`
/// and the azimuthal positions used by the embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolPoint {
    pub r: f64,
    pub theta: f64,
    pub tau: f64,
    pub xi: f64,
    pub big_theta: f64,
    pub phi: f64,
    pub psi: f64,
    #[serde(default)]
    pub azimuths: [f64; 2],
}

impl SymbolPoint {
    /// `lambda^2 = Theta^2 + Phi^2 / sin^2 + Psi^2 / cos^2`.
    pub fn lambda2(&self) -> f64 {
        let (s, c) = self.theta.sin_cos();
        self.big_theta.powi(2) + (self.phi / s).powi(2) + (self.psi / c).powi(2)
    }

    /// `x_k eta_j - x_j eta_k`, `k < j`, for the unit `S^3` in `R^4` with
    /// `x = (sin cos phi, sin sin phi, cos cos psi, cos sin psi)`.
    pub fn lambdas(&self) -> [f64; 6] {
        let (s, c) = self.theta.sin_cos();
        let (sp, cp) = self.azimuths[0].sin_cos();
        let (sq, cq) = self.azimuths[1].sin_cos();
        let x = [s * cp, s * sp, c * cq, c * sq];
        let d_th = [c * cp, c * sp, -s * cq, -s * sq];
        let d_ph = [-s * sp, s * cp, 0.0, 0.0];
        let d_ps = [0.0, 0.0, -c * sq, c * cq];
        let (u, v) = (self.phi / (s * s), self.psi / (c * c));
        let eta: [f64; 4] = std::array::from_fn(|i| self.big_theta * d_th[i] + u * d_ph[i] + v * d_ps[i]);
        let mut out = [0.0; 6];
        let mut n = 0;
        for k in 0..4 {
            for j in k + 1..4 {
                out[n] = x[k] * eta[j] - x[j] * eta[k];
                n += 1;
            }
        }
        out
    }

    fn norm2(&self) -> f64 {
        self.tau.powi(2) + self.xi.powi(2) + self.big_theta.powi(2) + self.phi.powi(2) + self.psi.powi(2)
    }
}

/// `f A`, the radial component of the photon-sphere vector field in
/// Schwarzschild time.
fn x_radial(p: &MultiplierProfile, r: J) -> J {
    p.f(r) * p.sp.a_fn(r)
}

/// `f~ = f A / (r - r_ps)` and its derivative.
pub fn f_tilde(p: &MultiplierProfile, r: f64) -> (f64, f64) {
    let rps = p.sp.r_ps();
    let z = r - rps;
    if z.abs() < 1e-5 * p.sp.r_s {
        let c = x_radial(p, J::var(rps)).0;
        let v = c[1] + z * (c[2] + z * (c[3] + z * c[4]));
        let d = c[2] + z * (2.0 * c[3] + z * 3.0 * c[4]);
        return (v, d);
    }
    let q = x_radial(p, J::var(r)) / (J::var(r) - rps);
    (q.val(), q.d(1))
}

/// Scalar coefficient of `p` in the bulk form of the photon-sphere part:
/// `q1 - delta1 q2 - div X / 2`.
pub fn q_eff(p: &MultiplierProfile, r: f64) -> f64 {
    let rj = J::var(r);
    let rk = rj.powi(p.sp.dim() + 2);
    let div_x = (rk * x_radial(p, rj)).deriv() / rk;
    (p.q1(rj) - p.q2(rj) * p.cfg.delta1 - div_x * 0.5).val()
}

/// `q~ = q_eff + f A / r`.
pub fn q_tilde(p: &MultiplierProfile, r: f64) -> f64 {
    q_eff(p, r) + x_radial(p, J::var(r)).val() / r
}

pub fn alpha_s2(p: &MultiplierProfile, r: f64) -> f64 {
    let rs = p.sp.r_s;
    let rps = p.sp.r_ps();
    let (ft, _) = f_tilde(p, r);
    r.powi(3) * (r + rps) * ft * (r - rps).powi(2) / (r * r - rs * rs).powi(2)
}

pub fn beta_s2(p: &MultiplierProfile, r: f64) -> f64 {
    let rs2 = p.sp.r_s * p.sp.r_s;
    let (ft, dft) = f_tilde(p, r);
    (r * r - rs2) * ft + (r - p.sp.r_ps()) * (dft * (r * r - rs2) - r * ft)
}

/// `nu` from `-g^tt r^2 q~ = nu alpha_S^2`. On the photon-sphere part
/// `q~ = A alpha_S^2 / r^2 - delta1 q2`, so `1 - nu` is a ratio of the
/// `(r - r_ps)^2`-free parts of `q2` and `alpha_S^2`.
pub fn nu(p: &MultiplierProfile, r: f64) -> f64 {
    let rs2 = p.sp.r_s * p.sp.r_s;
    let (ft, _) = f_tilde(p, r);
    let q2_red = p.q2_cut(J::var(r)).val() * r.powi(-(p.sp.dim() + 5));
    let al_red = r.powi(3) * (r + p.sp.r_ps()) * ft / (r * r - rs2).powi(2);
    1.0 - p.cfg.delta1 * q2_red * r * r / (p.sp.a_fn(r) * al_red)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwSos {
    /// Defect between `r^2 q^S` and the sum of squares over `scale`.
    pub residual: f64,
    /// Relative defect of the shifted form with `q~`.
    pub shift_residual: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Sum of the magnitudes of the terms on both sides.
    pub scale: f64,
    pub alpha_s2: f64,
    pub beta_s2: f64,
    pub nu: f64,
    /// `|sum lambda_i^2 - lambda^2|`.
    pub lambda_defect: f64,
}

fn require_five_dim(p: &MultiplierProfile) -> Result<()> {
    if p.sp.d != 1 {
        return Err(Error::InvalidConstants(format!("symbol identities need d = 1, got d = {}", p.sp.d)));
    }
    Ok(())
}

/// `r^2 q^S` computed from the bracket of `p_S` against the sum of squares.
pub fn schw_sos_verify(p: &MultiplierProfile, pt: &SymbolPoint) -> Result<SchwSos> {
    require_five_dim(p)?;
    let r = pt.r;
    let rs2 = p.sp.r_s * p.sp.r_s;
    let rj = J::var(r);
    let a = p.sp.a_fn(rj);
    let lam2 = pt.lambda2();
    let (tau, xi) = (pt.tau, pt.xi);
    let p_s = -(a.recip() * tau * tau) + a * (xi * xi) + rj.powi(-2) * lam2;
    let xr = x_radial(p, rj);
    // {P, s} = P_xi s_r - P_r s_xi with s = f A xi
    let lhs_terms = [
        r * r * a.val() * xi * xr.d(1) * xi,
        -0.5 * r * r * p_s.d(1) * xr.val(),
        r * r * q_eff(p, r) * p_s.val(),
    ];
    let lhs: f64 = lhs_terms.iter().sum();

    let big_p = rj * rj * p_s;
    let shifted = 0.5 * (2.0 * (rj * rj * a).val() * xi * xr.d(1) * xi - big_p.d(1) * xr.val())
        + q_tilde(p, r) * big_p.val();

    let lams = pt.lambdas();
    let sum_l: f64 = lams.iter().map(|l| l * l).sum();
    let al = alpha_s2(p, r);
    let be = beta_s2(p, r);
    let nu_v = nu(p, r);
    let nu_al = nu_v * al;
    let w = r * r - rs2;
    let terms = [
        (al - nu_al) * tau * tau,
        be * xi * xi,
        nu_al * w * r.powi(-4) * sum_l,
        nu_al * w * w * r.powi(-4) * xi * xi,
    ];
    let rhs: f64 = terms.iter().sum();
    let scale = terms.iter().chain(&lhs_terms).map(|t| t.abs()).sum::<f64>() + f64::MIN_POSITIVE;
    if !(nu_v > 0.0 && nu_v < 1.0) {
        return Err(Error::NuRangeViolation { nu: nu_v, r });
    }
    Ok(SchwSos {
        residual: (lhs - rhs).abs() / scale,
        shift_residual: (lhs - shifted).abs() / scale,
        lhs,
        rhs,
        scale,
        alpha_s2: al,
        beta_s2: be,
        nu: nu_v,
        lambda_defect: (sum_l - lam2).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpBracket {
    /// `(1/2i) {rho^2 p, s~}` from exact partials of `rho^2 p`.
    pub bracket: f64,
    /// `alpha^2 tau^2 (r - r_ab)^2 + beta^2 xi^2`.
    pub representation: f64,
    pub alpha_mp2: f64,
    pub beta_mp2: f64,
    pub r_ab: f64,
    pub residual: f64,
}

fn rho2_p(params: &BlackHoleParams, pt: &SymbolPoint) -> Jet<2> {
    crate::trapping::rho2_p_jet(params, pt.r, pt.theta, [pt.tau, pt.xi, pt.big_theta, pt.phi, pt.psi])
}

/// `R(r) / (r - r_ab)` by exact division of the degree-8 polynomial in `r`.
fn r_quotient(params: &BlackHoleParams, r: f64, root: f64, tau: f64, phi: f64, psi: f64) -> f64 {
    let rj = Jet::<9>::var(root);
    let c = r_ab(params, rj * rj, tau, phi, psi).0;
    let z = r - root;
    c[1..].iter().rev().fold(0.0, |acc, &ck| acc * z + ck)
}

/// `alpha_mp^2`, `beta_mp^2` and `r_ab` at `(r, tau, Phi, Psi)`.
pub fn mp_coefficients(
    params: &BlackHoleParams,
    p: &MultiplierProfile,
    r: f64,
    tau: f64,
    phi: f64,
    psi: f64,
) -> Result<(f64, f64, f64)> {
    let root = trapped_radius(params, tau, phi, psi)?.r;
    let (ft, dft) = f_tilde(p, r);
    let rj = Jet::<2>::var(r);
    let dr2 = params.delta(rj * rj) / (rj * rj);
    let delta = params.delta(r * r);
    let alpha2 = r * ft * r_quotient(params, r, root, tau, phi, psi) / (delta * delta * tau * tau);
    let k = ft * (r - root);
    let dk = dft * (r - root) + ft;
    let beta2 = dr2.val() * dk - 0.5 * dr2.d(1) * k;
    Ok((alpha2, beta2, root))
}

/// The bracket `(1/2i) {rho^2 p, i f~ (r - r_ab) xi}` at an on-shell point
/// and its positive representation.
pub fn mp_bracket(params: &BlackHoleParams, p: &MultiplierProfile, pt: &SymbolPoint) -> Result<MpBracket> {
    require_five_dim(p)?;
    let hp = rho2_p(params, pt);
    let n2 = pt.norm2();
    if hp.val().abs() > 1e-10 * n2.max(1.0) * pt.r * pt.r {
        return Err(Error::InvalidConstants(format!("point off the characteristic set: rho^2 p = {:e}", hp.val())));
    }
    let (alpha2, beta2, root) = mp_coefficients(params, p, pt.r, pt.tau, pt.phi, pt.psi)?;
    if !(alpha2 > 0.0 && beta2 > 0.0) {
        return Err(Error::PositivityViolation(format!(
            "alpha^2 = {alpha2:e}, beta^2 = {beta2:e} at r = {}, tau = {}, Phi = {}, Psi = {}",
            pt.r, pt.tau, pt.phi, pt.psi
        )));
    }
    let (ft, dft) = f_tilde(p, pt.r);
    let k = ft * (pt.r - root);
    let dk = dft * (pt.r - root) + ft;
    // d(rho^2 p)/d xi = 2 Delta xi / r^2
    let p_xi = 2.0 * params.delta(pt.r * pt.r) * pt.xi / (pt.r * pt.r);
    let t1 = 0.5 * p_xi * dk * pt.xi;
    let t2 = -0.5 * hp.d(1) * k;
    let bracket = t1 + t2;
    let representation = alpha2 * (pt.tau * (pt.r - root)).powi(2) + beta2 * pt.xi * pt.xi;
    let scale = t1.abs() + t2.abs() + representation.abs() + f64::MIN_POSITIVE;
    Ok(MpBracket { bracket, representation, alpha_mp2: alpha2, beta_mp2: beta2, r_ab: root, residual: (bracket - representation).abs() / scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Region {
    pub r_lo: f64,
    pub r_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Region {
    fn default() -> Self {
        Region { r_lo: 1.35, r_hi: 1.5, theta_lo: 0.2, theta_hi: 1.37, samples: 20000, seed: 7 }
    }
}

/// Uniform point on the unit sphere of `R^N`.
fn unit_vector<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    loop {
        let v: [f64; N] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.map(|x| x / n);
        }
    }
}

fn sample_point(rng: &mut ChaCha8Rng, region: &Region) -> SymbolPoint {
    let r = rng.random_range(region.r_lo..=region.r_hi);
    let theta = rng.random_range(region.theta_lo..=region.theta_hi);
    let [tau, xi, big_theta, phi, psi] = unit_vector::<5>(rng);
    let azimuths = [rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU)];
    SymbolPoint { r, theta, tau, xi, big_theta, phi, psi, azimuths }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwScan {
    pub residual_max: f64,
    pub shift_residual_max: f64,
    pub nu_range: [f64; 2],
    pub lambda_defect_max: f64,
    pub samples: usize,
    /// Sample with the largest residual.
    pub witness: SymbolPoint,
}

/// `schw_sos_verify` at random points of `[r_lo, r_hi]` times the unit
/// covector sphere.
pub fn schw_sos_scan(p: &MultiplierProfile, region: &Region) -> Result<SchwScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(region.seed);
    let mut out = SchwScan {
        residual_max: 0.0,
        shift_residual_max: 0.0,
        nu_range: [f64::INFINITY, f64::NEG_INFINITY],
        lambda_defect_max: 0.0,
        samples: region.samples,
        witness: SymbolPoint { r: 0.0, theta: 0.0, tau: 0.0, xi: 0.0, big_theta: 0.0, phi: 0.0, psi: 0.0, azimuths: [0.0; 2] },
    };
    for _ in 0..region.samples {
        let pt = sample_point(&mut rng, region);
        let s = schw_sos_verify(p, &pt)?;
        if !(s.residual <= out.residual_max) {
            out.residual_max = s.residual;
            out.witness = pt;
        }
        out.shift_residual_max = out.shift_residual_max.max(s.shift_residual);
        out.nu_range = [out.nu_range[0].min(s.nu), out.nu_range[1].max(s.nu)];
        out.lambda_defect_max = out.lambda_defect_max.max(s.lambda_defect / pt.lambda2().max(1.0));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketSample {
    pub r: f64,
    pub theta: f64,
    pub tau: f64,
    pub xi: f64,
    #[serde(rename = "Theta")]
    pub big_theta: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Psi")]
    pub psi: f64,
    pub r_ab: f64,
    pub bracket: f64,
    pub representation: f64,
    pub alpha_mp2: f64,
    pub beta_mp2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketScan {
    pub bracket_min: f64,
    pub residual_max: f64,
    /// `min bracket / (tau^2 (r - r_ab)^2 + xi^2)`: positive when the zero
    /// set lies on the tube `r = r_ab, xi = 0`.
    pub tube_ratio_min: f64,
    pub alpha_min: f64,
    pub beta_min: f64,
    pub samples: usize,
    pub witness: SymbolPoint,
}

/// On-shell samples: spatial covector uniform on the unit sphere, `tau`
/// one of the two roots of `p`.
pub fn mp_bracket_scan(
    params: &BlackHoleParams,
    p: &MultiplierProfile,
    region: &Region,
) -> Result<(BracketScan, Vec<BracketSample>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(region.seed);
    let mut rows = Vec::with_capacity(region.samples);
    let mut scan = BracketScan {
        bracket_min: f64::INFINITY,
        residual_max: 0.0,
        tube_ratio_min: f64::INFINITY,
        alpha_min: f64::INFINITY,
        beta_min: f64::INFINITY,
        samples: region.samples,
        witness: SymbolPoint { r: 0.0, theta: 0.0, tau: 0.0, xi: 0.0, big_theta: 0.0, phi: 0.0, psi: 0.0, azimuths: [0.0; 2] },
    };
    for _ in 0..region.samples {
        let r = rng.random_range(region.r_lo..=region.r_hi);
        let theta = rng.random_range(region.theta_lo..=region.theta_hi);
        let [xi, big_theta, phi, psi] = unit_vector::<4>(&mut rng);
        let roots = tau_roots(params, r, theta, xi, big_theta, phi, psi)?;
        let tau = if rng.random_bool(0.5) { roots.tau1 } else { roots.tau2 };
        let pt = SymbolPoint { r, theta, tau, xi, big_theta, phi, psi, azimuths: [0.0; 2] };
        let b = mp_bracket(params, p, &pt)?;
        if b.bracket < scan.bracket_min {
            scan.bracket_min = b.bracket;
            scan.witness = pt;
        }
        scan.residual_max = scan.residual_max.max(b.residual);
        let tube = (tau * (r - b.r_ab)).powi(2) + xi * xi;
        scan.tube_ratio_min = scan.tube_ratio_min.min(b.bracket / tube);
        scan.alpha_min = scan.alpha_min.min(b.alpha_mp2);
        scan.beta_min = scan.beta_min.min(b.beta_mp2);
        rows.push(BracketSample {
            r,
            theta,
            tau,
            xi,
            big_theta,
            phi,
            psi,
            r_ab: b.r_ab,
            bracket: b.bracket,
            representation: b.representation,
            alpha_mp2: b.alpha_mp2,
            beta_mp2: b.beta_mp2,
        });
    }
    Ok((scan, rows))
}

pub fn write_bracket_csv(path: &Path, rows: &[BracketSample]) -> Result<()> {
    let io = |e: csv::Error| Error::Io { path: path.display().to_string(), reason: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })
}

/// Per-point data entering the `mu_j`.
#[derive(Clone, Copy, Debug)]
struct MuPoint {
    pt: SymbolPoint,
    tau1: f64,
    tau2: f64,
    alpha: [f64; 2],
    beta2: [f64; 2],
    c: [f64; 2],
    nu: f64,
    rs2: f64,
}

fn mu_point(params: &BlackHoleParams, p: &MultiplierProfile, pt: SymbolPoint) -> Result<MuPoint> {
    let roots = tau_roots(params, pt.r, pt.theta, pt.xi, pt.big_theta, pt.phi, pt.psi)?;
    let (tau1, tau2) = (roots.tau1, roots.tau2);
    let mut alpha = [0.0; 2];
    let mut beta2 = [0.0; 2];
    let mut c = [0.0; 2];
    for (i, ti) in [tau1, tau2].into_iter().enumerate() {
        let (a2, b2, root) = mp_coefficients(params, p, pt.r, ti, pt.phi, pt.psi)?;
        if !(a2 > 0.0 && b2 > 0.0) {
            return Err(Error::PositivityViolation(format!("alpha^2 = {a2:e}, beta^2 = {b2:e} at r = {}", pt.r)));
        }
        c[i] = pt.r - root;
        alpha[i] = 2.0 * ti.abs() / (tau1 - tau2) * a2.sqrt() * c[i];
        beta2[i] = b2;
    }
    Ok(MuPoint { pt, tau1, tau2, alpha, beta2, c, nu: nu(p, pt.r), rs2: params.r_s * params.r_s })
}

/// The squares `mu_1^2, ..., mu_11^2`.
fn mu_squares(m: &MuPoint, c_eps: f64) -> [f64; 11] {
    let pt = &m.pt;
    let (t, t1, t2) = (pt.tau, m.tau1, m.tau2);
    let w = pt.r * pt.r - m.rs2;
    let lam = pt.lambdas();
    let lam2: f64 = lam.iter().map(|l| l * l).sum();
    let denom = lam2 + w * pt.xi * pt.xi;
    let minus = (m.alpha[0] * (t - t2) - m.alpha[1] * (t - t1)).powi(2) * m.nu / 4.0;
    let plus = (m.alpha[0] * (t - t2) + m.alpha[1] * (t - t1)).powi(2) * (1.0 - m.nu) / 4.0;
    let mut mu = [0.0; 11];
    for i in 0..6 {
        mu[i] = lam[i] * lam[i] / denom * minus;
    }
    mu[6] = w * pt.xi * pt.xi / denom * minus;
    mu[7] = plus;
    let (b1, b2) = (m.beta2[0], m.beta2[1]);
    let xi2 = pt.xi * pt.xi;
    mu[8] = 0.5 * (b1 + b2 - c_eps) * xi2;
    let gap = 2.0 * (t1 - t2).powi(2);
    mu[9] = (c_eps - b2 + b1) * (t - t2).powi(2) / gap * xi2;
    mu[10] = (c_eps - b1 + b2) * (t - t1).powi(2) / gap * xi2;
    mu
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuBound {
    pub eps0: f64,
    pub c_big: f64,
    pub c_band: [f64; 2],
    pub kappa: f64,
    pub witness: SymbolPoint,
    /// `max (mu_10^2 + mu_11^2) / ((tau - tau_1)^2 + (tau - tau_2)^2)`.
    pub envelope: f64,
    /// Relative defect of `sum_{j <= 9} mu_j^2` against `r^2 q^S`; only
    /// meaningful at `a = b = 0`.
    pub schw_reconstruction: Option<f64>,
    pub samples: usize,
}

pub fn mu_lower_bound(params: &BlackHoleParams, p: &MultiplierProfile, region: &Region, eps0: f64) -> Result<MuBound> {
    require_five_dim(p)?;
    params.check_small(eps0)?;
    if (params.r_s - p.sp.r_s).abs() > 1e-15 * params.r_s {
        return Err(Error::InvalidConstants("profile and black hole disagree on r_s".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(region.seed);
    let mut pts = Vec::with_capacity(region.samples);
    while pts.len() < region.samples {
        let pt = sample_point(&mut rng, region);
        if pt.xi.abs() + pt.big_theta.abs() + pt.phi.abs() + pt.psi.abs() < 1e-3 {
            continue;
        }
        pts.push(mu_point(params, p, pt)?);
    }
    let lo = pts.iter().map(|m| (m.beta2[0] - m.beta2[1]).abs()).fold(0.0, f64::max) / eps0;
    let hi = pts.iter().map(|m| m.beta2[0] + m.beta2[1]).fold(f64::INFINITY, f64::min) / eps0;
    if lo > hi {
        return Err(Error::CBandEmpty { lo, hi });
    }
    let c_big = (2.0 * lo).min(0.5 * (lo + hi));
    let c_eps = c_big * eps0;
    let schw = params.a == 0.0 && params.b == 0.0;
    let mut kappa = f64::INFINITY;
    let mut witness = pts[0].pt;
    let mut envelope: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for m in &pts {
        let mu = mu_squares(m, c_eps);
        let total: f64 = mu.iter().sum();
        let (t, t1, t2) = (m.pt.tau, m.tau1, m.tau2);
        let le = (m.c[1] * (t - t1)).powi(2) + (m.c[0] * (t - t2)).powi(2) + m.pt.xi.powi(2);
        let k = total / le;
        if k < kappa {
            kappa = k;
            witness = m.pt;
        }
        envelope = envelope.max((mu[9] + mu[10]) / ((t - t1).powi(2) + (t - t2).powi(2)));
        if schw {
            let s = schw_sos_verify(p, &m.pt)?;
            let part: f64 = mu[..9].iter().sum();
            recon = recon.max((part - s.lhs).abs() / s.scale);
        }
    }
    if !(kappa > 0.0) {
        return Err(Error::LowerBoundViolation {
            kappa,
            witness: vec![witness.r, witness.theta, witness.tau, witness.xi, witness.big_theta, witness.phi, witness.psi],
        });
    }
    Ok(MuBound {
        eps0,
        c_big,
        c_band: [lo, hi],
        kappa,
        witness,
        envelope,
        schw_reconstruction: schw.then_some(recon),
        samples: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosReport {
    pub residual_max: f64,
    pub nu_range: [f64; 2],
    pub kappa: f64,
    #[serde(rename = "C_big")]
    pub c_big: f64,
    pub eps0: f64,
    pub witness_points: Vec<SymbolPoint>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, SchwParams, TH};
    use crate::schw_multiplier::MultiplierConfig;
    use std::sync::OnceLock;

    fn profile() -> &'static MultiplierProfile {
        static P: OnceLock<MultiplierProfile> = OnceLock::new();
        P.get_or_init(|| MultiplierProfile::build(SchwParams::new(1.0, 1).unwrap(), MultiplierConfig::default()).unwrap())
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn closed_forms_at_pinned_radius() {
        let p = profile();
        let (ft, dft) = f_tilde(p, 1.6);
        assert!(close(ft, 1.3906665285252076, 1e-12), "{ft}");
        assert!(close(dft, -1.1148482053981319, 1e-10), "{dft}");
        assert!(close(alpha_s2(p, 1.6), 0.24352064622165306, 1e-12));
        assert!(close(beta_s2(p, 1.6), 1.4329396806226068, 1e-10));
        assert!(close(q_tilde(p, 1.6), 0.057966744964763704, 1e-10));
        assert!(close(nu(p, 1.6), 0.9999964508229582, 1e-12));
    }

    #[test]
    fn sum_of_squares_at_pinned_point() {
        let p = profile();
        // lambda^2 = 5/4 from Theta alone at theta = pi/4
        let pt = SymbolPoint {
            r: 1.6,
            theta: std::f64::consts::FRAC_PI_4,
            tau: 0.7,
            xi: -0.3,
            big_theta: 1.25f64.sqrt(),
            phi: 0.0,
            psi: 0.0,
            azimuths: [0.3, 1.1],
        };
        let s = schw_sos_verify(p, &pt).unwrap();
        assert!(close(s.lhs, 0.20956195696100658, 1e-10), "{}", s.lhs);
        assert!(s.residual < 1e-12 && s.shift_residual < 1e-12);
        assert!(s.lambda_defect < 1e-14);
    }

    #[test]
    fn photon_sphere_degeneracy() {
        let p = profile();
        let rps = p.sp.r_ps();
        assert_eq!(alpha_s2(p, rps), 0.0);
        let pt = SymbolPoint { r: rps, theta: 0.7, tau: 1.0, xi: 0.0, big_theta: 0.0, phi: 0.0, psi: 0.0, azimuths: [0.0; 2] };
        // pure tau^2 data: only the (1 - nu) alpha_S^2 tau^2 term survives
        let s = schw_sos_verify(p, &pt).unwrap();
        assert!(s.lhs.abs() < 1e-12, "{}", s.lhs);
    }

    #[test]
    fn myers_perry_pinned_values() {
        let p = profile();
        let bh = BlackHoleParams::new(1.0, 0.03, 0.03).unwrap();
        let (a2, b2, root) = mp_coefficients(&bh, p, 1.6, 1.0, 0.2, -0.1).unwrap();
        assert!(close(root, 1.4125141896973187, 1e-12), "{root}");
        assert!(close(a2, 7.031645304931949, 1e-10), "{a2}");
        assert!(close(b2, 1.4283303694797903, 1e-10), "{b2}");
        let pt = SymbolPoint {
            r: 1.6,
            theta: 0.5,
            tau: 1.0,
            xi: 1.5944127897033761,
            big_theta: 0.2,
            phi: 0.2,
            psi: -0.1,
            azimuths: [0.0; 2],
        };
        let b = mp_bracket(&bh, p, &pt).unwrap();
        assert!(close(b.bracket, 3.878201976392956, 1e-10), "{}", b.bracket);
        assert!(b.residual < 1e-12);
    }

    #[test]
    fn bracket_vanishes_on_tube() {
        let p = profile();
        let bh = BlackHoleParams::new(1.0, 0.05, 0.03).unwrap();
        let (tau, phi, psi) = (1.0, 0.3, -0.2);
        let r = trapped_radius(&bh, tau, phi, psi).unwrap().r;
        // choose Theta so that the point is null with xi = 0
        let th = 0.8;
        let x = r * r;
        let g = geometry::contravariant(&bh, x, th);
        let cov = [tau, 0.0, 0.0, phi, psi];
        let mut h = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                h += g[i][j] * cov[i] * cov[j];
            }
        }
        let big_theta = (-h / g[TH][TH]).sqrt();
        let pt = SymbolPoint { r, theta: th, tau, xi: 0.0, big_theta, phi, psi, azimuths: [0.0; 2] };
        let b = mp_bracket(&bh, p, &pt).unwrap();
        assert!(b.bracket.abs() < 1e-12 && b.representation.abs() < 1e-20, "{} {}", b.bracket, b.representation);
    }

    #[test]
    fn lambdas_sum_to_spherical_symbol() {
        let pt = SymbolPoint { r: 1.4, theta: 0.4, tau: 0.0, xi: 0.0, big_theta: 0.3, phi: -0.7, psi: 0.25, azimuths: [2.0, -1.0] };
        let s: f64 = pt.lambdas().iter().map(|l| l * l).sum();
        assert!((s - pt.lambda2()).abs() < 1e-14);
    }
}
