use super::SolverDomain;
use crate::error::{Error, Result};
use crate::geometry::{IngoingChart, SchwParams};
use crate::numerics::Jet;

/// Discretized mode equation in the variables `(u, P)` with
/// `P = h w - beta u_r`, `h = -g^vv`, `beta = g^vr`:
///
/// `d_v u = (P + beta u_r) / h`,
/// `d_v P = r^-k d_r(r^k (beta P + u_r) / h) - lambda u / r^2 - f`,
///
/// using `beta^2 + g^rr h = 1`. The `u_r` flux is compact, the `beta P`
/// flux centered, both one-sided at the ends.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub sp: SchwParams,
    pub dom: SolverDomain,
    pub r: Vec<f64>,
    pub spacing: f64,
    pub lambda: f64,
    /// `r^(d+2)` on the grid.
    pub rk: Vec<f64>,
    pub inv_h: Vec<f64>,
    /// `beta / h`.
    pub shift: Vec<f64>,
    /// `r^k / h` at the cell midpoints.
    pub half_weight: Vec<f64>,
    pub g_vr: Vec<f64>,
    pub g_rr: Vec<f64>,
    /// Largest `|dr/dv~|` along characteristics.
    pub speed_max: f64,
}

pub fn assemble_mode(sp: SchwParams, chart: &IngoingChart, dom: &SolverDomain) -> Result<ModeOperator> {
    dom.validate(&sp)?;
    if chart.r_e > dom.r_e || chart.r_max < dom.r_max {
        return Err(Error::AssemblyError(format!(
            "chart covers [{}, {}], domain needs [{}, {}]",
            chart.r_e, chart.r_max, dom.r_e, dom.r_max
        )));
    }
    let n = dom.cells();
    let hs = dom.h();
    let k = sp.dim() + 2;
    let r: Vec<f64> = (0..=n).map(|i| if i == n { dom.r_max } else { dom.r_e + hs * i as f64 }).collect();
    let h_at = |x: f64| -> Result<(f64, f64, f64)> {
        let gi = chart.inverse_block(Jet::<1>::var(x));
        let h = -gi[0][0].val();
        if !(h > 0.0) {
            return Err(Error::AssemblyError(format!("slice not spacelike at r = {x}: g^vv = {}", -h)));
        }
        Ok((h, gi[0][1].val(), gi[1][1].val()))
    };
    let mut op = ModeOperator {
        sp,
        dom: *dom,
        r: r.clone(),
        spacing: hs,
        lambda: dom.eigenvalue(&sp),
        rk: r.iter().map(|x| x.powi(k)).collect(),
        inv_h: Vec::with_capacity(n + 1),
        shift: Vec::with_capacity(n + 1),
        half_weight: Vec::with_capacity(n),
        g_vr: Vec::with_capacity(n + 1),
        g_rr: Vec::with_capacity(n + 1),
        speed_max: 0.0,
    };
    for &ri in &r {
        let (h, b, a) = h_at(ri)?;
        op.inv_h.push(1.0 / h);
        op.shift.push(b / h);
        op.g_vr.push(b);
        op.g_rr.push(a);
        // null slopes solve h s^2 - 2 b s - a = 0
        op.speed_max = op.speed_max.max((b.abs() + 1.0) / h);
    }
    for w in r.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        op.half_weight.push(m.powi(k) / h_at(m)?.0);
    }
    Ok(op)
}

/// Second-order first derivative, one-sided at both ends.
pub(super) fn d1(v: &[f64], h: f64, out: &mut [f64]) {
    let n = v.len() - 1;
    let c = 0.5 / h;
    out[0] = c * (-3.0 * v[0] + 4.0 * v[1] - v[2]);
    for i in 1..n {
        out[i] = c * (v[i + 1] - v[i - 1]);
    }
    out[n] = c * (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]);
}

/// Fourth-order first derivative, one-sided near both ends.
pub(super) fn d1_fourth(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let c = 1.0 / (12.0 * h);
    let mut out = vec![0.0; n + 1];
    let left = |s: &dyn Fn(usize) -> f64| {
        [
            c * (-25.0 * s(0) + 48.0 * s(1) - 36.0 * s(2) + 16.0 * s(3) - 3.0 * s(4)),
            c * (-3.0 * s(0) - 10.0 * s(1) + 18.0 * s(2) - 6.0 * s(3) + s(4)),
        ]
    };
    let [a, b] = left(&|j| v[j]);
    out[0] = a;
    out[1] = b;
    let [a, b] = left(&|j| v[n - j]);
    out[n] = -a;
    out[n - 1] = -b;
    for i in 2..n - 1 {
        out[i] = c * (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]);
    }
    out
}

/// Work arrays for [`ModeOperator::rhs`].
pub(super) struct Scratch {
    ur: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
}

impl Scratch {
    pub(super) fn new(n: usize) -> Self {
        Scratch { ur: vec![0.0; n], g: vec![0.0; n], dg: vec![0.0; n] }
    }
}

impl ModeOperator {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `(d_v u, d_v P)` for the state `(u, P)`; `f` is the forcing on the
    /// grid.
    pub(super) fn rhs(&self, u: &[f64], p: &[f64], f: Option<&[f64]>, du: &mut [f64], dp: &mut [f64], s: &mut Scratch) {
        let hs = self.spacing;
        let n = u.len() - 1;
        d1(u, hs, &mut s.ur);
        for i in 0..=n {
            du[i] = self.inv_h[i] * p[i] + self.shift[i] * s.ur[i];
            s.g[i] = self.rk[i] * self.shift[i] * p[i];
        }
        d1(&s.g, hs, &mut s.dg);
        let c = 1.0 / (hs * hs);
        let wh = &self.half_weight;
        for i in 1..n {
            let compact = c * (wh[i] * (u[i + 1] - u[i]) - wh[i - 1] * (u[i] - u[i - 1]));
            dp[i] = (s.dg[i] + compact) / self.rk[i];
        }
        // full flux r^k (beta P + u_r) / h at the ends
        let flux = |i: usize| self.rk[i] * (self.shift[i] * p[i] + self.inv_h[i] * s.ur[i]);
        let c1 = 0.5 / hs;
        dp[0] = c1 * (-3.0 * flux(0) + 4.0 * flux(1) - flux(2)) / self.rk[0];
        dp[n] = c1 * (3.0 * flux(n) - 4.0 * flux(n - 1) + flux(n - 2)) / self.rk[n];
        for i in 0..=n {
            let r = self.r[i];
            dp[i] -= self.lambda * u[i] / (r * r);
            if let Some(f) = f {
                dp[i] -= f[i];
            }
        }
    }

    /// `P` from `(u, w)`.
    pub fn momentum(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let ur = d1_fourth(u, self.spacing);
        (0..u.len()).map(|i| (w[i] - self.shift[i] * ur[i]) / self.inv_h[i]).collect()
    }

    /// `w = d_v u` from `(u, P)`.
    pub fn velocity(&self, u: &[f64], p: &[f64]) -> Vec<f64> {
        let ur = d1_fourth(u, self.spacing);
        (0..u.len()).map(|i| self.inv_h[i] * p[i] + self.shift[i] * ur[i]).collect()
    }

    /// Discrete `r^-k d_r(r^k g^rr u_r) - lambda u / r^2`, the operator on
    /// `v~`-independent data.
    pub fn spatial(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut ur = vec![0.0; n];
        d1(u, self.spacing, &mut ur);
        let p: Vec<f64> = (0..n).map(|i| -self.shift[i] * ur[i] / self.inv_h[i]).collect();
        let mut du = vec![0.0; n];
        let mut dp = vec![0.0; n];
        self.rhs(u, &p, None, &mut du, &mut dp, &mut Scratch::new(n));
        dp
    }

    /// `(1/h, r^-k (r^k / h)')` at node `i`, the coefficients of `u_rr` and
    /// `u_r` in the `u_r` flux.
    pub fn radial_coefficients(&self, i: usize) -> (f64, f64) {
        let i = i.clamp(1, self.len() - 2);
        let dw = (self.half_weight[i] - self.half_weight[i - 1]) / self.spacing;
        (self.inv_h[i], dw / self.rk[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_derivative_is_exact_on_quartics() {
        let h = 0.1;
        let x: Vec<f64> = (0..20).map(|i| i as f64 * h).collect();
        let v: Vec<f64> = x.iter().map(|x| x.powi(4) - 2.0 * x * x + x).collect();
        let d = d1_fourth(&v, h);
        for (xi, di) in x.iter().zip(&d) {
            let e = 4.0 * xi.powi(3) - 4.0 * xi + 1.0;
            assert!((di - e).abs() < 1e-11, "{xi}: {di} vs {e}");
        }
    }

    #[test]
    fn second_order_derivative_exact_on_quadratics() {
        let h = 0.25;
        let v: Vec<f64> = (0..10).map(|i| (i as f64 * h).powi(2)).collect();
        let mut a = vec![0.0; 10];
        d1(&v, h, &mut a);
        for (i, x) in a.iter().enumerate() {
            assert!((x - 2.0 * i as f64 * h).abs() < 1e-12);
        }
    }
}
