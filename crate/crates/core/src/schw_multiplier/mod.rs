//! The Tangherlini multiplier `(X, q, m)`: photon-sphere part, redshift
//! part and zeroth-order corrections, with the positivity checks of its
//! bulk and boundary quadratic forms.

pub mod boundary;
pub mod profiles;
pub mod quadform;

use crate::error::{Error, Result};
use crate::geometry::{IngoingChart, SchwParams};
use crate::numerics::{quad, smooth};
use profiles::{Cap, Mollifier, J};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiplierConfig {
    pub alpha_cap: f64,
    pub n_start: f64,
    pub n_max: f64,
    /// Fixed `eps`; chosen by the smallness integral when absent.
    pub eps: Option<f64>,
    pub delta: f64,
    pub delta1: f64,
    pub eps_match: f64,
    pub chi_inner: f64,
    pub chi_outer: f64,
    pub gamma_max: f64,
    pub gamma_slope: f64,
    pub r_e: f64,
    pub r_max: f64,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        MultiplierConfig {
            alpha_cap: 4.9,
            n_start: 16.0,
            n_max: 1.0e6,
            eps: None,
            delta: 1e-2,
            delta1: 1e-4,
            eps_match: 1e-3,
            chi_inner: 0.05,
            chi_outer: 0.15,
            gamma_max: 0.15,
            gamma_slope: 2.1,
            r_e: 0.95,
            r_max: 50.0,
        }
    }
}

/// Radial profiles of the multiplier, evaluated as jets on demand.
#[derive(Clone, Debug)]
pub struct MultiplierProfile {
    pub sp: SchwParams,
    pub cfg: MultiplierConfig,
    pub eps: f64,
    pub cap: Cap,
    pub mollifier: Mollifier,
    /// `Q2(r) = sum q2[k] (r - r_ps)^k`.
    pub q2_poly: [f64; 3],
    pub match_error: f64,
    pub chart: IngoingChart,
}

/// Pointwise data of `(X, q, m)` in the ingoing chart.
#[derive(Clone, Copy, Debug)]
pub struct Triple {
    pub x_r: J,
    pub x_v: J,
    pub q: J,
    pub m_v: J,
    pub m_r: J,
}

impl MultiplierProfile {
    pub fn build(sp: SchwParams, cfg: MultiplierConfig) -> Result<Self> {
        if !(cfg.alpha_cap > 0.0 && cfg.alpha_cap < 5.0) {
            return Err(Error::ProfileConstructionFailure(format!("alpha_cap = {} not in (0, 5)", cfg.alpha_cap)));
        }
        if !(cfg.delta >= 0.0 && cfg.delta1 >= 0.0 && cfg.delta.is_finite() && cfg.delta1.is_finite()) {
            return Err(Error::ProfileConstructionFailure("need finite delta, delta1 >= 0".into()));
        }
        let chart = IngoingChart::new(sp, cfg.r_e * sp.r_s, cfg.r_max * sp.r_s)?;
        let cap = Cap { alpha: cfg.alpha_cap };
        let eps = match cfg.eps {
            Some(e) => e,
            None => select_eps(&sp, &cap, cfg.delta)?,
        };
        let mut p = MultiplierProfile {
            sp,
            cfg: cfg.clone(),
            eps,
            cap,
            mollifier: Mollifier::new(cfg.n_start),
            q2_poly: [0.0; 3],
            match_error: f64::INFINITY,
            chart,
        };
        let mut n = cfg.n_start;
        loop {
            p.set_mollifier(n);
            p.match_error = p.mollification_error(200);
            if p.match_error < cfg.eps_match {
                break;
            }
            n *= 2.0;
            if n > cfg.n_max {
                return Err(Error::ProfileConstructionFailure(format!(
                    "mollification error {} above {} at N = {}",
                    p.match_error, cfg.eps_match, n / 2.0
                )));
            }
        }
        p.validate()?;
        Ok(p)
    }

    fn set_mollifier(&mut self, n: f64) {
        self.mollifier = Mollifier::new(n);
        let rps = self.sp.r_ps();
        let d0 = self.mollifier.conv_coeffs(&self.cap, 0.0);
        let a0 = self.cap.derivs(0.0);
        let outer = [d0[0] - a0[0], d0[1] - a0[1], d0[2] - a0[2] / 2.0, 0.0, 0.0];
        let comp = profiles::h(&self.sp, J::var(rps)).compose(&outer);
        self.q2_poly = [comp.0[0], comp.0[1], comp.0[2]];
    }

    pub fn cc(&self) -> f64 {
        let d = self.sp.d as f64;
        (d + 2.0) / (d + 3.0) * self.sp.r_ps() * self.sp.r_s.powi(self.sp.dim() + 1)
    }

    fn rpow(&self, r: J) -> J {
        r.powi(self.sp.dim() + 2)
    }

    pub fn chi(&self, r: J) -> J {
        profiles::chi(&self.sp, r, self.cfg.chi_inner * self.sp.r_s, self.cfg.chi_outer * self.sp.r_s)
    }

    pub fn q2_poly_jet(&self, r: J) -> J {
        let z = r - self.sp.r_ps();
        z * z * self.q2_poly[2] + z * self.q2_poly[1] + self.q2_poly[0]
    }

    pub fn f1(&self, r: J) -> J {
        let hh = profiles::h(&self.sp, r);
        profiles::g(&self.sp, r) + self.cap.jet(hh) * self.cc() / self.rpow(r)
    }

    /// `(psi_N * a)(h(r))` as a jet.
    fn conv_h(&self, r: J) -> J {
        let hh = profiles::h(&self.sp, r);
        hh.compose(&self.mollifier.conv_coeffs(&self.cap, hh.val()))
    }

    /// Mollified `F`; defined for `r > r_s`.
    pub fn big_f(&self, r: J) -> J {
        let chi = self.chi(r);
        if chi.val() == 0.0 && chi.d(1) == 0.0 {
            return self.f1(r);
        }
        let hh = profiles::h(&self.sp, r);
        let a = self.cap.jet(hh);
        let mixed = (-chi + 1.0) * a + chi * (self.conv_h(r) - self.q2_poly_jet(r));
        profiles::g(&self.sp, r) + mixed * self.cc() / self.rpow(r)
    }

    /// `f = r^-(d+2) rho_eps(r^(d+2) F)`, continued by `-2/(eps r^(d+2))`
    /// through the horizon.
    pub fn f(&self, r: J) -> J {
        let rk = self.rpow(r);
        if r.val() <= self.sp.r_s {
            return rk.recip() * (-2.0 / self.eps);
        }
        let big_f = self.big_f(r);
        let y = rk * big_f * self.eps;
        if y.val() >= -1.0 {
            return big_f;
        }
        profiles::rho(y) / (rk * self.eps)
    }

    /// `q1 = 1/2 A r^-(d+2) d_r(r^(d+2) f)`.
    pub fn q1(&self, r: J) -> J {
        let rk = self.rpow(r);
        self.sp.a_fn(r) / rk * (rk * self.f(r)).deriv() * 0.5
    }

    /// Cutoff of `q2`: 1 on `r >= r_m`, 0 below `r_m - 0.05 r_s`.
    pub fn q2_cut(&self, r: J) -> J {
        let w = 0.05 * self.sp.r_s;
        smooth::step_jet((r - self.chart.r_m + w) / w)
    }

    /// `q2 = chi_{r > r_m} r^-(d+3) ((r - r_ps)/r)^2`.
    pub fn q2(&self, r: J) -> J {
        let w = (r - self.sp.r_ps()) / r;
        self.q2_cut(r) * w * w / r.powi(self.sp.dim() + 3)
    }

    pub fn b_outer(&self) -> f64 {
        0.25 * (self.sp.r_s + 3.0 * self.sp.r_ps())
    }

    /// Decreasing bump, 1 up to `r_s`, 0 from `(r_s + 3 r_ps)/4`.
    pub fn b_red(&self, r: J) -> J {
        let rs = self.sp.r_s;
        if r.val() <= rs {
            return J::cst(1.0);
        }
        -smooth::step_jet((r - rs) / (self.b_outer() - rs)) + 1.0
    }

    /// Rises with slope `gamma_slope` below `r_s + 0.02 r_s`, flat on a short
    /// plateau, then decreases to 0 at `r_ps - 0.01 r_s`.
    pub fn gamma(&self, r: J) -> J {
        let rs = self.sp.r_s;
        let (r1, r2) = (rs + 0.02 * rs, self.sp.r_ps() - 0.01 * rs);
        let kappa = self.cfg.gamma_slope / self.cfg.gamma_max;
        let rise = -smooth::ramp_jet(-r + r1, 0.01 * rs) * kappa + 1.0;
        let fall = -smooth::step_jet((r - r1) / (r2 - r1)) + 1.0;
        rise * fall * self.cfg.gamma_max
    }

    /// `m_t = (d+1) r_s^(d+1) r^-(d+2) b gamma`.
    pub fn m_t(&self, r: J) -> J {
        let n = self.sp.dim() + 1;
        self.b_red(r) * self.gamma(r) * (n as f64 * self.sp.r_s.powi(n)) / self.rpow(r)
    }

    /// Wave operator on a radial function.
    pub fn box_radial(&self, r: J, phi: J) -> J {
        let rk = self.rpow(r);
        (rk * self.sp.a_fn(r) * phi.deriv()).deriv() / rk
    }

    /// The `u^2` coefficient `n(r)` of the combined lower bound.
    pub fn n_coef(&self, r: f64) -> f64 {
        let rj = J::var(r);
        let d = self.sp.d as f64;
        let delta = self.cfg.delta;
        let ns = (d + 1.0) * self.sp.r_s.powi(self.sp.dim() + 1);
        let rk = self.rpow(rj).val();
        let b = self.b_red(rj);
        let gam = self.gamma(rj);
        let bg = b * gam;
        -delta * ns / 2.0 * b.val() * gam.val() * gam.val() / rk
            + delta * (d + 2.0) / 4.0 * self.box_radial(rj, b / rj).val()
            + delta * ns / rk * bg.d(1)
            + self.l_f(r)
    }

    pub fn l_f(&self, r: f64) -> f64 {
        profiles::l_of(&self.sp, r, self.f(J::var(r)))
    }

    pub fn l_big_f(&self, r: f64) -> f64 {
        profiles::l_of(&self.sp, r, self.big_f(J::var(r)))
    }

    /// The `(psi_N * a''')` term of the decomposition of `l(F)`; it is
    /// non-negative where `a''' <= 0` on the mollifier's reach.
    pub fn l_mollifier_term(&self, r: f64) -> f64 {
        let rj = J::var(r);
        let hh = profiles::h(&self.sp, rj);
        let c3 = self.mollifier.conv_coeffs(&self.cap, hh.val())[3] * 6.0;
        let a = self.sp.a_fn(r);
        -0.25 * self.cc() / self.rpow(rj).val() * self.chi(rj).val() * a * a * c3 * hh.d(1).powi(3)
    }

    /// `max_k max_r |d^k (F - f1)|`, `k <= 2`, over the support of `chi`.
    pub fn mollification_error(&self, n: usize) -> f64 {
        let rps = self.sp.r_ps();
        let w = self.cfg.chi_outer * self.sp.r_s;
        let mut err: f64 = 0.0;
        for i in 0..=n {
            let r = rps - w + 2.0 * w * i as f64 / n as f64;
            let diff = self.big_f(J::var(r)) - self.f1(J::var(r));
            for k in 0..3 {
                err = err.max(diff.d(k).abs());
            }
        }
        err
    }

    pub fn triple(&self, r: f64) -> Triple {
        let rj = J::var(r);
        let (delta, d1) = (self.cfg.delta, self.cfg.delta1);
        let a = self.sp.a_fn(rj);
        let mp = self.chart.mu_prime(rj);
        let f = self.f(rj);
        let b = self.b_red(rj);
        let d = self.sp.d as f64;
        let q = self.q1(rj) - b / rj * (delta * (d + 2.0) / 2.0) - self.q2(rj) * d1;
        let mt = self.m_t(rj) * delta;
        Triple {
            x_r: f * a - b * delta,
            x_v: f * (-(a * mp) + 1.0) + b * mp * delta,
            q,
            m_v: mt,
            m_r: mt * mp,
        }
    }

    /// Checks the profile invariants on a grid.
    pub fn validate(&self) -> Result<()> {
        let rs = self.sp.r_s;
        let rps = self.sp.r_ps();
        let fail = |s: String| Err(Error::ProfileConstructionFailure(s));
        let at = J::var(rps);
        if self.f1(at).val().abs() > 1e-12 || self.big_f(at).val().abs() > 1e-12 {
            return fail(format!("F(r_ps) = {}, f1(r_ps) = {}", self.big_f(at).val(), self.f1(at).val()));
        }
        let n = 4000;
        for i in 0..=n {
            let r = (rs + 1e-3 * rs) * (20.0 / 1.001f64).powf(i as f64 / n as f64);
            let fp = self.big_f(J::var(r)).d(1);
            if !(fp > 0.0) {
                return fail(format!("F' = {fp} at r = {r}"));
            }
        }
        let rb = self.b_outer();
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let r = rs + (rb - rs) * i as f64 / 400.0;
            let b = self.b_red(J::var(r)).val();
            if b < 0.0 || b > prev + 1e-15 || (i < 360 && b <= 0.0) {
                return fail(format!("b not positive decreasing at r = {r}"));
            }
            prev = b;
        }
        if self.b_red(J::var(rb)).val() != 0.0 {
            return fail("b does not vanish at (r_s + 3 r_ps)/4".into());
        }
        let r_e = self.chart.r_e;
        for i in 0..=2000 {
            let r = r_e + (rps - r_e) * i as f64 / 2000.0;
            let gj = self.gamma(J::var(r));
            if gj.val() < 0.0 || gj.val() > 1.0 || gj.d(1) <= -1.0 {
                return fail(format!("gamma = {}, gamma' = {} at r = {r}", gj.val(), gj.d(1)));
            }
        }
        if self.gamma(J::var(rps)).val() != 0.0 || !(self.gamma(J::var(rs)).val() > 0.0) {
            return fail("gamma support".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    pub f: f64,
    #[serde(rename = "F")]
    pub big_f: Option<f64>,
    pub f1: Option<f64>,
    pub q1: f64,
    pub q2: f64,
    pub b_red: f64,
    pub gamma: f64,
    pub n: f64,
    #[serde(rename = "lF")]
    pub l_big_f: Option<f64>,
    pub lf: f64,
}

impl MultiplierProfile {
    pub fn row(&self, r: f64) -> ProfileRow {
        let rj = J::var(r);
        let outside = r > self.sp.r_s;
        ProfileRow {
            r,
            f: self.f(rj).val(),
            big_f: outside.then(|| self.big_f(rj).val()),
            f1: outside.then(|| self.f1(rj).val()),
            q1: self.q1(rj).val(),
            q2: self.q2(rj).val(),
            b_red: self.b_red(rj).val(),
            gamma: self.gamma(rj).val(),
            n: self.n_coef(r),
            l_big_f: outside.then(|| self.l_big_f(r)),
            lf: self.l_f(r),
        }
    }
}

pub fn write_profile_csv(path: &std::path::Path, rows: &[ProfileRow]) -> Result<()> {
    let io = |e: String| Error::Io { path: path.display().to_string(), reason: e };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| io(e.to_string()))?;
    }
    w.flush().map_err(|e| io(e.to_string()))
}

/// `y(u) = eps r^(d+2) F(r)` at `r = r_s + e^u`, near the horizon where
/// `F = f1`.
fn y_of_u(sp: &SchwParams, cap: &Cap, eps: f64, u: f64) -> f64 {
    let r = sp.r_s + u.exp();
    let k = sp.dim() + 2;
    let d = sp.d as f64;
    let cc = (d + 2.0) / (d + 3.0) * sp.r_ps() * sp.r_s.powi(sp.dim() + 1);
    eps * (r.powi(k) - sp.r_ps().powi(k) + cc * cap.eval(profiles::h_of_u(sp, u)))
}

/// The near-horizon error integral
/// `int_{eps r^(d+2) f < -1} delta + eps |rho''| + eps^2 A^-1 |rho'''| dr`.
pub fn smallness_integral(sp: &SchwParams, cap: &Cap, eps: f64, delta: f64) -> Result<f64> {
    let u_hi = (sp.r_ps() - sp.r_s).ln();
    let u_lo = -1e3 / eps;
    let find = |target: f64| -> Result<f64> {
        let f = |u: f64| (y_of_u(sp, cap, eps, u) - target, 0.0);
        let (mut lo, mut hi) = (u_lo, u_hi);
        if f(lo).0 > 0.0 || f(hi).0 < 0.0 {
            return Err(Error::ProfileConstructionFailure(format!("no level {target} for eps = {eps}")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let (u3, u1) = (find(-3.0)?, find(-1.0)?);
    let n = sp.dim() + 1;
    let rs = sp.r_s;
    let integrand = |u: f64| {
        let y = y_of_u(sp, cap, eps, u);
        let [r2, r3] = profiles::rho_high(y);
        let r = rs + u.exp();
        let sum: f64 = (0..n).map(|k| r.powi(k) * rs.powi(n - 1 - k)).sum();
        let ainv_du = r.powi(n) / sum;
        eps * r2.abs() * u.exp() + eps * eps * r3.abs() * ainv_du
    };
    let scale = u1 - u3;
    let body = quad::integrate(integrand, u3, u1, 1e-14 * scale.max(1.0));
    Ok(delta * u1.exp() + body)
}

/// Largest `eps` in `{0.1, 0.01, ...}` whose smallness integral is at most
/// `delta / 10`.
pub fn select_eps(sp: &SchwParams, cap: &Cap, delta: f64) -> Result<f64> {
    let mut eps = 0.1;
    for _ in 0..12 {
        if smallness_integral(sp, cap, eps, delta)? <= delta / 10.0 {
            return Ok(eps);
        }
        eps /= 10.0;
    }
    Err(Error::ProfileConstructionFailure(format!("no eps >= 1e-12 meets the smallness bound for delta = {delta}")))
}
