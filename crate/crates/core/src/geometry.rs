//! Myers-Perry and Tangherlini geometry.
//!
//! The Myers-Perry chart is `(t, x, theta, phi, psi)` with `x = r^2` and
//! `theta` in `(0, pi/2)`. Index order in all 5x5 arrays follows that list.

use crate::error::{Error, Result};
use crate::numerics::{quad, smooth, Jet, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const T: usize = 0;
pub const X: usize = 1;
pub const TH: usize = 2;
pub const PHI: usize = 3;
pub const PSI: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackHoleParams {
    pub r_s: f64,
    pub a: f64,
    pub b: f64,
}

impl BlackHoleParams {
    pub fn new(r_s: f64, a: f64, b: f64) -> Result<Self> {
        let p = BlackHoleParams { r_s, a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_s > 0.0) {
            return Err(Error::NakedSingularity(format!("r_s = {} must be positive", self.r_s)));
        }
        let s = self.r_s * self.r_s - self.a * self.a - self.b * self.b;
        if s < 0.0 || s * s < 4.0 * self.a * self.a * self.b * self.b {
            return Err(Error::NakedSingularity(format!(
                "a = {}, b = {}, r_s = {}",
                self.a, self.b, self.r_s
            )));
        }
        Ok(())
    }

    /// Enforce `max(|a|, |b|) <= eps0 r_s`.
    pub fn check_small(&self, eps0: f64) -> Result<()> {
        if self.a.abs().max(self.b.abs()) > eps0 * self.r_s {
            return Err(Error::Config(format!(
                "rotation (a, b) = ({}, {}) exceeds eps0 r_s = {}",
                self.a,
                self.b,
                eps0 * self.r_s
            )));
        }
        Ok(())
    }

    pub fn delta<S: Scalar>(&self, x: S) -> S {
        (x + self.a * self.a) * (x + self.b * self.b) - x * (self.r_s * self.r_s)
    }

    pub fn rho2<S: Scalar>(&self, x: S, th: S) -> S {
        let c = th.cos();
        let s = th.sin();
        x + c * c * (self.a * self.a) + s * s * (self.b * self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonData {
    pub x_minus: f64,
    pub x_plus: f64,
    pub r_ps: f64,
    pub x_ps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryCache {
    pub delta: f64,
    pub rho2: f64,
    pub sqrt_det: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub t: f64,
    pub x: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

impl ChartPoint {
    pub fn r(&self) -> f64 {
        self.x.sqrt()
    }
}

pub fn horizons(p: &BlackHoleParams) -> Result<HorizonData> {
    p.validate()?;
    let s = p.r_s * p.r_s - p.a * p.a - p.b * p.b;
    let disc = (s * s - 4.0 * p.a * p.a * p.b * p.b).max(0.0).sqrt();
    let mut x_plus = 0.5 * (s + disc);
    let mut x_minus = if x_plus > 0.0 {
        p.a * p.a * p.b * p.b / x_plus
    } else {
        0.0
    };
    for x in [&mut x_plus, &mut x_minus] {
        let d = 2.0 * *x + p.a * p.a + p.b * p.b - p.r_s * p.r_s;
        if d != 0.0 {
            *x -= p.delta(*x) / d;
        }
    }
    Ok(HorizonData {
        x_minus,
        x_plus,
        r_ps: std::f64::consts::SQRT_2 * p.r_s,
        x_ps: 2.0 * p.r_s * p.r_s,
    })
}

fn check_point(p: &BlackHoleParams, x: f64, th: f64) -> Result<()> {
    let sc = th.sin() * th.cos();
    if !(th > 0.0 && th < std::f64::consts::FRAC_PI_2) || sc.abs() < 1e-300 {
        return Err(Error::CoordinateSingularity(format!("theta = {th} not in (0, pi/2)")));
    }
    if !(x > 0.0) {
        return Err(Error::CoordinateSingularity(format!("x = {x} must be positive")));
    }
    if p.delta(x) == 0.0 {
        return Err(Error::CoordinateSingularity(format!("Delta(x) = 0 at x = {x}")));
    }
    Ok(())
}

/// Covariant components from the line element.
pub fn covariant<S: Scalar>(p: &BlackHoleParams, x: S, th: S) -> [[S; 5]; 5] {
    let (a, b, rs2) = (p.a, p.b, p.r_s * p.r_s);
    let s2 = th.sin() * th.sin();
    let c2 = th.cos() * th.cos();
    let rho2 = p.rho2(x, th);
    let delta = p.delta(x);
    let k = rho2.recip() * rs2;
    let z = S::cst(0.0);
    let mut g = [[z; 5]; 5];
    g[T][T] = k - 1.0;
    g[T][PHI] = k * s2 * a;
    g[T][PSI] = k * c2 * b;
    g[PHI][PHI] = (x + a * a) * s2 + k * s2 * s2 * (a * a);
    g[PSI][PSI] = (x + b * b) * c2 + k * c2 * c2 * (b * b);
    g[PHI][PSI] = k * s2 * c2 * (a * b);
    g[X][X] = rho2 / (delta * 4.0);
    g[TH][TH] = rho2;
    g[PHI][T] = g[T][PHI];
    g[PSI][T] = g[T][PSI];
    g[PSI][PHI] = g[PHI][PSI];
    g
}

/// Contravariant components from the closed-form inverse.
pub fn contravariant<S: Scalar>(p: &BlackHoleParams, x: S, th: S) -> [[S; 5]; 5] {
    let (a, b, rs2) = (p.a, p.b, p.r_s * p.r_s);
    let s2 = th.sin() * th.sin();
    let c2 = th.cos() * th.cos();
    let rho2 = p.rho2(x, th);
    let delta = p.delta(x);
    let ir = rho2.recip();
    let id = delta.recip();
    let z = S::cst(0.0);
    let mut g = [[z; 5]; 5];
    g[T][T] = ir * (s2 * (a * a - b * b) - (x + a * a) * (delta + (x + b * b) * rs2) * id);
    g[T][PHI] = ir * id * (x + b * b) * (a * rs2);
    g[T][PSI] = ir * id * (x + a * a) * (b * rs2);
    g[PHI][PHI] = ir * (s2.recip() - ((x + b * b) * (a * a - b * b) + b * b * rs2) * id);
    g[PSI][PSI] = ir * (c2.recip() + ((x + a * a) * (a * a - b * b) - a * a * rs2) * id);
    g[PHI][PSI] = -(ir * id) * (a * b * rs2);
    g[X][X] = ir * delta * 4.0;
    g[TH][TH] = ir;
    g[PHI][T] = g[T][PHI];
    g[PSI][T] = g[T][PSI];
    g[PSI][PHI] = g[PHI][PSI];
    g
}

pub struct MetricPair {
    pub cov: [[f64; 5]; 5],
    pub inv: [[f64; 5]; 5],
    pub cache: GeometryCache,
}

pub fn metric_pair(p: &BlackHoleParams, pt: &ChartPoint) -> Result<MetricPair> {
    check_point(p, pt.x, pt.theta)?;
    let rho2 = p.rho2(pt.x, pt.theta);
    Ok(MetricPair {
        cov: covariant(p, pt.x, pt.theta),
        inv: contravariant(p, pt.x, pt.theta),
        cache: GeometryCache {
            delta: p.delta(pt.x),
            rho2,
            sqrt_det: 0.5 * pt.theta.sin() * pt.theta.cos() * rho2,
        },
    })
}

/// Tangherlini parameters with `d = n - 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwParams {
    pub r_s: f64,
    pub d: u32,
}

impl SchwParams {
    pub fn new(r_s: f64, d: u32) -> Result<Self> {
        if !(r_s > 0.0) || d < 1 {
            return Err(Error::Config(format!("need r_s > 0 and d >= 1, got r_s = {r_s}, d = {d}")));
        }
        Ok(SchwParams { r_s, d })
    }

    pub fn dim(&self) -> i32 {
        self.d as i32
    }

    /// `A(r) = 1 - (r_s/r)^(d+1)`.
    pub fn a_fn<S: Scalar>(&self, r: S) -> S {
        -(r.recip() * self.r_s).powi(self.dim() + 1) + 1.0
    }

    /// Photon sphere, `r_ps^(d+1) = (d+3)/2 r_s^(d+1)`.
    pub fn r_ps(&self) -> f64 {
        let d = self.d as f64;
        self.r_s * ((d + 3.0) / 2.0).powf(1.0 / (d + 1.0))
    }

    /// Tortoise coordinate with `dr*/dr = 1/A` and `r*(r_ps) = 0`. Defined
    /// for `r != r_s` (inside the horizon it is the interior tortoise
    /// coordinate).
    pub fn r_star(&self, r: f64) -> Result<f64> {
        let rs = self.r_s;
        if !(r > 0.0) || r == rs {
            return Err(Error::CoordinateSingularity(format!("r* undefined at r = {r}")));
        }
        let rp = self.r_ps();
        let k = rs / (self.d as f64 + 1.0);
        // 1/A - 1 - k/(r - r_s) is smooth across r_s
        let reg = |s: f64| {
            let u = (rs / s).powi(self.dim() + 1);
            if (s - rs).abs() < 1e-6 * rs {
                // series of the regular part around r_s
                let n = self.d as f64 + 1.0;
                let t = (s - rs) / rs;
                return (n + 1.0) / (2.0 * n) - 1.0 + t * (n * n - 1.0) / (12.0 * n);
            }
            u / (1.0 - u) - k / (s - rs)
        };
        let smooth_part = quad::integrate(reg, rp, r, 1e-14);
        Ok(r - rp + k * ((r - rs).abs() / (rp - rs)).ln() + smooth_part)
    }
}

/// Ingoing chart `(v~, r, omega)` with `v~ = v - mu(r)` and `v = t + r*`.
#[derive(Clone, Debug)]
pub struct IngoingChart {
    pub sp: SchwParams,
    pub r_e: f64,
    pub r_max: f64,
    pub r_m: f64,
    pub r_l: f64,
    mu_rm: f64,
}

impl IngoingChart {
    pub fn new(sp: SchwParams, r_e: f64, r_max: f64) -> Result<Self> {
        if !(0.0 < r_e && r_e < sp.r_s && sp.r_s < r_max) {
            return Err(Error::Config(format!(
                "need 0 < r_e < r_s < r_max, got r_e = {r_e}, r_max = {r_max}"
            )));
        }
        let r_m = 0.5 * (sp.r_s + sp.r_ps());
        let r_l = sp.r_s + 0.05 * sp.r_s;
        let mut ch = IngoingChart {
            sp,
            r_e,
            r_max,
            r_m,
            r_l,
            mu_rm: 0.0,
        };
        ch.mu_rm = sp.r_star(r_m)?;
        ch.verify(2000)?;
        Ok(ch)
    }

    /// Check the chart invariants on a uniform grid.
    pub fn verify(&self, n: usize) -> Result<()> {
        for i in 0..=n {
            let r = self.r_e + (self.r_max - self.r_e) * i as f64 / n as f64;
            let mp = self.mu_prime(Jet::<1>::var(r)).val();
            let a = self.sp.a_fn(r);
            if !(mp > 0.0) {
                return Err(Error::ChartConstructionFailure { r, reason: format!("mu' = {mp}") });
            }
            if !(2.0 - a * mp > 0.0) {
                return Err(Error::ChartConstructionFailure {
                    r,
                    reason: format!("2 - A mu' = {}", 2.0 - a * mp),
                });
            }
        }
        Ok(())
    }

    pub fn mu_prime<const N: usize>(&self, r: Jet<N>) -> Jet<N> {
        let rv = r.val();
        let ainv = self.sp.a_fn(r).recip();
        if rv >= self.r_m {
            ainv
        } else if rv <= self.r_l {
            Jet::cst(1.0)
        } else {
            let s = smooth::step_jet((r - self.r_l) / (self.r_m - self.r_l));
            (ainv - 1.0) * s + 1.0
        }
    }

    /// `mu = r*` for `r >= r_m`, continued inward by integrating `mu'`.
    pub fn mu(&self, r: f64) -> Result<f64> {
        if r >= self.r_m {
            return self.sp.r_star(r);
        }
        let pts: &[f64] = if r < self.r_l {
            &[r, self.r_l, self.r_m]
        } else {
            &[r, self.r_m]
        };
        let inner = quad::integrate_pieces(|s| self.mu_prime(Jet::<1>::var(s)).val(), pts, 1e-13);
        Ok(self.mu_rm - inner)
    }

    /// Covariant `(v~, r)` block `[[g_vv, g_vr], [g_vr, g_rr]]`.
    pub fn block<const N: usize>(&self, r: Jet<N>) -> [[Jet<N>; 2]; 2] {
        let a = self.sp.a_fn(r);
        let mp = self.mu_prime(r);
        let gvr = -(a * mp) + 1.0;
        [[-a, gvr], [gvr, mp * 2.0 - a * mp * mp]]
    }

    /// Contravariant `(v~, r)` block; the block determinant is exactly -1.
    pub fn inverse_block<const N: usize>(&self, r: Jet<N>) -> [[Jet<N>; 2]; 2] {
        let a = self.sp.a_fn(r);
        let mp = self.mu_prime(r);
        let gvr = -(a * mp) + 1.0;
        [[-(mp * 2.0 - a * mp * mp), gvr], [gvr, a]]
    }
}

fn matmul(a: &[[f64; 5]; 5], b: &[[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let mut c = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            for k in 0..5 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Max-norm of `g_ab g^bc - delta_a^c` at `(x, theta)`.
pub fn inversion_defect(p: &BlackHoleParams, x: f64, th: f64) -> Result<f64> {
    let m = metric_pair(p, &ChartPoint { t: 0.0, x, theta: th, phi: 0.0, psi: 0.0 })?;
    let prod = matmul(&m.cov, &m.inv);
    let mut dev: f64 = 0.0;
    for (i, row) in prod.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            dev = dev.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(dev)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionScan {
    pub samples: usize,
    pub defect_max: f64,
    /// `(a, b, r, theta)` at the largest defect.
    pub witness: [f64; 4],
}

/// [`inversion_defect`] over random `|a|, |b| <= ab_max r_s` (naked cases
/// redrawn), `r` in `[r_lo, r_hi] r_s` and `theta` in `(0, pi/2)`.
pub fn inversion_scan(r_s: f64, ab_max: f64, r_range: [f64; 2], samples: usize, seed: u64) -> Result<InversionScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = InversionScan { samples, defect_max: 0.0, witness: [0.0; 4] };
    let mut done = 0;
    while done < samples {
        let a = rng.random_range(-ab_max..=ab_max) * r_s;
        let b = rng.random_range(-ab_max..=ab_max) * r_s;
        let r = rng.random_range(r_range[0]..=r_range[1]) * r_s;
        let th = rng.random_range(1e-3..std::f64::consts::FRAC_PI_2 - 1e-3);
        let Ok(p) = BlackHoleParams::new(r_s, a, b) else { continue };
        let dev = inversion_defect(&p, r * r, th)?;
        if !(dev <= out.defect_max) {
            out.defect_max = dev;
            out.witness = [a, b, r, th];
        }
        done += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, SQRT_2};

    #[test]
    fn inversion_scan_is_reproducible() {
        let a = inversion_scan(1.0, 0.3, [1.1, 6.0], 2000, 3).unwrap();
        let b = inversion_scan(1.0, 0.3, [1.1, 6.0], 2000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.defect_max < 1e-12, "{a:?}");
    }

    #[test]
    fn horizons_match_oracle() {
        let h = horizons(&BlackHoleParams::new(1.0, 0.3, 0.2).unwrap()).unwrap();
        assert!((h.x_minus - 0.004_157_801_509_647_85).abs() < 1e-15);
        assert!((h.x_plus - 0.865_842_198_490_352_1).abs() < 1e-15);
        let h = horizons(&BlackHoleParams::new(1.0, 0.3, 0.0).unwrap()).unwrap();
        assert!((h.x_plus - 0.91).abs() < 1e-15 && h.x_minus == 0.0);
        let h = horizons(&BlackHoleParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((h.x_minus, h.x_plus), (0.0, 1.0));
        assert!((h.r_ps - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn naked_singularity_rejected() {
        assert!(matches!(
            BlackHoleParams::new(1.0, 0.6, 0.5),
            Err(Error::NakedSingularity(_))
        ));
    }

    #[test]
    fn contravariant_matches_oracle() {
        let p = BlackHoleParams::new(1.0, 0.3, 0.2).unwrap();
        let g = contravariant(&p, 2.0, FRAC_PI_3);
        let expect = [
            (T, T, -1.917_684_935_490_210_0),
            (T, PHI, 0.131_725_110_357_446_42),
            (T, PSI, 0.089_969_111_322_569_61),
            (PHI, PHI, 0.619_050_622_117_750_9),
            (PSI, PSI, 1.951_963_812_615_434_4),
            (PHI, PSI, -0.012_914_226_505_632_002),
            (X, X, 4.411_400_730_816_078),
            (TH, TH, 0.487_210_718_635_809_97),
        ];
        for (i, j, v) in expect {
            assert!((g[i][j] - v).abs() < 1e-14 * v.abs().max(1.0), "g^{i}{j}");
        }
    }

    #[test]
    fn tangherlini_limit() {
        let p = BlackHoleParams::new(1.0, 0.0, 0.0).unwrap();
        let g = contravariant(&p, 4.0, FRAC_PI_4);
        assert!((g[T][T] + 4.0 / 3.0).abs() < 1e-14);
        assert!((g[X][X] - 12.0).abs() < 1e-13);
        assert_eq!(g[T][PHI], 0.0);
        assert_eq!(g[PHI][PSI], 0.0);
    }

    #[test]
    fn singular_points_rejected() {
        let p = BlackHoleParams::new(1.0, 0.0, 0.0).unwrap();
        let at = |x, theta| ChartPoint { t: 0.0, x, theta, phi: 0.0, psi: 0.0 };
        assert!(metric_pair(&p, &at(1.0, 0.5)).is_err());
        assert!(metric_pair(&p, &at(2.0, 0.0)).is_err());
        assert!(metric_pair(&p, &at(2.0, std::f64::consts::FRAC_PI_2)).is_err());
        let m = metric_pair(&p, &at(2.0, 0.5)).unwrap();
        let id = matmul(&m.cov, &m.inv);
        for i in 0..5 {
            for j in 0..5 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tortoise_matches_closed_form() {
        let sp = SchwParams::new(1.0, 1).unwrap();
        assert!(sp.r_star(SQRT_2).unwrap().abs() < 1e-15);
        assert!((sp.r_star(2.0).unwrap() - 0.917_853_880_312_393_1).abs() < 1e-12);
        // interior branch agrees with the closed form r + 1/2 ln|(r-1)/(r+1)| + c
        let c = -(SQRT_2 + 0.5 * ((SQRT_2 - 1.0) / (SQRT_2 + 1.0)).ln());
        let r: f64 = 0.97;
        let exact = r + 0.5 * ((1.0 - r) / (r + 1.0)).ln() + c;
        assert!((sp.r_star(r).unwrap() - exact).abs() < 1e-11);
    }

    #[test]
    fn chart_far_block_is_schwarzschild() {
        let sp = SchwParams::new(1.0, 1).unwrap();
        let ch = IngoingChart::new(sp, 0.95, 30.0).unwrap();
        for &r in &[1.25, 2.0, 10.0] {
            let g = ch.block(Jet::<1>::var(r));
            let a = sp.a_fn(r);
            assert!((g[0][0].val() + a).abs() < 1e-15);
            assert!(g[0][1].val().abs() < 1e-14);
            assert!((g[1][1].val() - 1.0 / a).abs() < 1e-13);
            assert!((ch.mu(r).unwrap() - sp.r_star(r).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn chart_block_inverse_and_slices() {
        let sp = SchwParams::new(1.0, 1).unwrap();
        let ch = IngoingChart::new(sp, 0.95, 30.0).unwrap();
        for i in 0..400 {
            let r = 0.95 + 0.001 * i as f64;
            let g = ch.block(Jet::<1>::var(r));
            let gi = ch.inverse_block(Jet::<1>::var(r));
            let det = g[0][0].val() * g[1][1].val() - g[0][1].val() * g[0][1].val();
            assert!((det + 1.0).abs() < 1e-13);
            for a in 0..2 {
                for b in 0..2 {
                    let s: f64 = (0..2).map(|k| g[a][k].val() * gi[k][b].val()).sum();
                    assert!((s - if a == b { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
            assert!(g[1][1].val() > 0.0);
            if r > 1.0 {
                assert!(ch.mu(r).unwrap() >= sp.r_star(r).unwrap() - 1e-12, "r={r} mu={} rs={}", ch.mu(r).unwrap(), sp.r_star(r).unwrap());
            }
        }
    }
}
