//! Building blocks of the photon-sphere multiplier: `g`, `h`, the capped
//! logarithm `a`, the mollifier `psi_N` and the saturation `rho`.

use crate::geometry::SchwParams;
use crate::numerics::{quad, smooth, Jet};

pub type J = Jet<5>;

/// `g(r) = (r^(d+2) - r_ps^(d+2)) / r^(d+2)`.
pub fn g(sp: &SchwParams, r: J) -> J {
    let k = sp.dim() + 2;
    -(r.recip() * sp.r_ps()).powi(k) + 1.0
}

/// `h(r) = ln((r^(d+1) - r_s^(d+1)) / ((d+1)/2 r_s^(d+1)))`, for `r > r_s`.
pub fn h(sp: &SchwParams, r: J) -> J {
    let n = sp.dim() + 1;
    let rsn = sp.r_s.powi(n);
    ((r.powi(n) - rsn) / (0.5 * n as f64 * rsn)).ln()
}

/// `h` as a function of `u = ln(r - r_s)`, exact for `r - r_s` below f64
/// resolution of `r`.
pub fn h_of_u(sp: &SchwParams, u: f64) -> f64 {
    let n = sp.dim() + 1;
    let rs = sp.r_s;
    let r = rs + u.exp();
    let sum: f64 = (0..n).map(|k| r.powi(k) * rs.powi(n - 1 - k)).sum();
    u + sum.ln() - (0.5 * n as f64 * rs.powi(n)).ln()
}

/// The capped logarithm: `x` for `x <= 0`, the quintic on `[0, alpha]`,
/// `8 alpha / 15` beyond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cap {
    pub alpha: f64,
}

impl Cap {
    pub fn plateau(&self) -> f64 {
        8.0 * self.alpha / 15.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }

    /// `[a, a', a'', a''', a'''']` with the regular part of `a''''`.
    /// One-sided from the right at the break points.
    pub fn derivs(&self, x: f64) -> [f64; 5] {
        let al = self.alpha;
        let (a2, a4) = (al * al, al.powi(4));
        if x < 0.0 {
            [x, 1.0, 0.0, 0.0, 0.0]
        } else if x >= al {
            [self.plateau(), 0.0, 0.0, 0.0, 0.0]
        } else {
            let x2 = x * x;
            [
                x - 2.0 * x * x2 / (3.0 * a2) + x2 * x2 * x / (5.0 * a4),
                (1.0 - x2 / a2).powi(2),
                -4.0 * x / a2 + 4.0 * x * x2 / a4,
                -4.0 / a2 + 12.0 * x2 / a4,
                24.0 * x / a4,
            ]
        }
    }

    pub fn jet(&self, x: J) -> J {
        let x0 = x.val();
        let al = self.alpha;
        if x0 < 0.0 {
            x
        } else if x0 >= al {
            J::cst(self.plateau())
        } else {
            let x2 = x * x;
            x - x2 * x * (2.0 / (3.0 * al * al)) + x2 * x2 * x * (1.0 / (5.0 * al.powi(4)))
        }
    }

    /// Jumps of `a'''` at `0` and at `alpha`.
    fn third_jumps(&self) -> [(f64, f64); 2] {
        let a2 = self.alpha * self.alpha;
        [(0.0, -4.0 / a2), (self.alpha, -8.0 / a2)]
    }
}

/// `psi_N(s) = N psi(N s)` with `psi` the normalized bump on `(-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mollifier {
    pub n: f64,
    norm: f64,
}

impl Mollifier {
    pub fn new(n: f64) -> Self {
        let norm = quad::integrate(smooth::bump, -1.0, 1.0, 1e-15);
        Mollifier { n, norm }
    }

    pub fn density(&self, s: f64) -> f64 {
        self.n * smooth::bump(self.n * s) / self.norm
    }

    /// Taylor coefficients at `y` of `psi_N * a` through order four.
    pub fn conv_coeffs(&self, cap: &Cap, y: f64) -> [f64; 5] {
        let n = self.n;
        let mut pts = vec![-1.0];
        for (b, _) in cap.third_jumps() {
            let t = n * (y - b);
            if t > -1.0 && t < 1.0 {
                pts.push(t);
            }
        }
        pts.push(1.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = [0.0; 5];
        let mut fact = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 1 {
                fact *= k as f64;
            }
            let v = quad::integrate_pieces(
                |t| smooth::bump(t) * cap.derivs(y - t / n)[k],
                &pts,
                1e-15,
            ) / self.norm;
            *o = v / fact;
        }
        for (b, jump) in cap.third_jumps() {
            out[4] += jump * self.density(y - b) / 24.0;
        }
        out
    }
}

/// `rho(R)`: identity for `R >= -1`, `-2` for `R <= -3`, increasing.
pub fn rho(y: J) -> J {
    smooth::ramp_jet(y + 3.0, 2.0) - 2.0
}

/// `[rho'', rho''']` at `y`.
pub fn rho_high(y: f64) -> [f64; 2] {
    let s = smooth::step_jet(Jet::<3>::var((y + 3.0) / 2.0));
    [s.d(1) / 2.0, s.d(2) / 4.0]
}

/// `chi(r)`: 1 on `|r - r_ps| <= inner`, 0 beyond `outer`.
pub fn chi(sp: &SchwParams, r: J, inner: f64, outer: f64) -> J {
    let z = r - sp.r_ps();
    let az = if z.val() < 0.0 { -z } else { z };
    -smooth::step_jet((az - inner) / (outer - inner)) + 1.0
}

/// `l(F) = -1/4 r^-(d+2) d_r[A r^(d+2) d_r{A r^-(d+2) d_r(r^(d+2) F)}]`,
/// with `F` given as a jet at `r`.
pub fn l_of(sp: &SchwParams, r: f64, f: J) -> f64 {
    let rj = J::var(r);
    let k = sp.dim() + 2;
    let rk = rj.powi(k);
    let a = sp.a_fn(rj);
    let inner = a / rk * (rk * f).deriv();
    let outer = a * rk * inner.deriv();
    -0.25 * outer.deriv().val() / rk.val()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp() -> SchwParams {
        SchwParams::new(1.0, 1).unwrap()
    }

    #[test]
    fn h_and_g_vanish_at_photon_sphere() {
        let s = sp();
        let r = J::var(s.r_ps());
        assert!(h(&s, r).val().abs() < 1e-15);
        assert!(g(&s, r).val().abs() < 1e-15);
        let u = (1.3f64 - 1.0).ln();
        assert!((h_of_u(&s, u) - h(&s, J::var(1.3)).val()).abs() < 1e-14);
    }

    #[test]
    fn cap_is_c2_with_plateau() {
        let c = Cap { alpha: 4.9 };
        assert!((c.eval(4.9) - 8.0 * 4.9 / 15.0).abs() < 1e-14);
        for &b in &[0.0, 4.9] {
            let l = c.derivs(b - 1e-9);
            let r = c.derivs(b + 1e-9);
            for k in 0..3 {
                assert!((l[k] - r[k]).abs() < 1e-8, "k = {k} at {b}");
            }
        }
        for i in 1..=100 {
            let x = 4.9 / 3f64.sqrt() * i as f64 / 100.0;
            assert!(c.derivs(x)[3] <= 1e-15);
        }
        let jx = c.jet(J::var(1.7));
        let dv = c.derivs(1.7);
        for k in 0..5 {
            assert!((jx.d(k) - dv[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn mollifier_preserves_linear_part() {
        let m = Mollifier::new(32.0);
        let c = Cap { alpha: 4.9 };
        let v = m.conv_coeffs(&c, -0.5);
        assert!((v[0] + 0.5).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        assert!(v[2].abs() < 1e-15 && v[4].abs() < 1e-15);
    }

    #[test]
    fn mollified_derivatives_match_differences() {
        let m = Mollifier::new(16.0);
        let c = Cap { alpha: 4.9 };
        let y = 0.01;
        let h = 1e-3;
        let v = |y: f64| m.conv_coeffs(&c, y);
        let c0 = v(y);
        // third coefficient against a difference of the second
        let d3 = (v(y + h)[2] - v(y - h)[2]) / (2.0 * h) * 2.0 / 6.0;
        assert!((c0[3] - d3).abs() < 1e-5, "{} {}", c0[3], d3);
        let d4 = (v(y + h)[3] - v(y - h)[3]) / (2.0 * h) * 6.0 / 24.0;
        assert!((c0[4] - d4).abs() < 1e-4 * c0[4].abs().max(1.0), "{} {}", c0[4], d4);
    }

    #[test]
    fn rho_saturates() {
        assert!((rho(J::var(0.5)).val() - 0.5).abs() < 1e-15);
        assert!((rho(J::var(-1.0)).val() + 1.0).abs() < 1e-14);
        assert_eq!(rho(J::var(-4.0)).val(), -2.0);
        let m = rho(J::var(-2.0));
        assert!(m.d(1) > 0.0 && m.d(1) < 1.0);
        let [r2, _] = rho_high(-2.0);
        assert!(r2 > 0.0);
    }

    #[test]
    fn l_annihilates_inverse_power() {
        let s = sp();
        let r = 1.7;
        let f = J::var(r).powi(-3) * 2.5;
        assert!(l_of(&s, r, f).abs() < 1e-13);
    }
}
