//! Null geodesics on Myers-Perry: Hamilton flow, constants of motion and
//! the radial potential.

use crate::error::{Error, Result};
use crate::geometry::{self, BlackHoleParams, ChartPoint, TH, X};
use crate::numerics::ode::{self, Control, Tolerance};
use crate::numerics::{roots, Jet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub tau: f64,
    #[serde(rename = "Xi")]
    pub xi_x: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Psi")]
    pub psi: f64,
}

impl Covector {
    pub fn as_array(&self) -> [f64; 5] {
        [self.tau, self.xi_x, self.theta, self.phi, self.psi]
    }

    /// The r-dual `xi = 2 r Xi`.
    pub fn xi_r(&self, x: f64) -> f64 {
        2.0 * x.sqrt() * self.xi_x
    }

    pub fn scale(&self, s: f64) -> Self {
        Covector {
            tau: s * self.tau,
            xi_x: s * self.xi_x,
            theta: s * self.theta,
            phi: s * self.phi,
            psi: s * self.psi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub position: ChartPoint,
    pub momentum: Covector,
}

/// `p = g^{ab} p_a p_b`.
pub fn hamiltonian(params: &BlackHoleParams, x: f64, th: f64, k: &Covector) -> f64 {
    let g = geometry::contravariant(params, x, th);
    let p = k.as_array();
    let mut s = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            s += g[i][j] * p[i] * p[j];
        }
    }
    s
}

/// Solve `p = 0` for `Xi` with the other components fixed; returns the
/// outgoing (`Xi >= 0`) root.
pub fn null_xi(params: &BlackHoleParams, x: f64, th: f64, k: &Covector) -> Result<f64> {
    let mut k0 = *k;
    k0.xi_x = 0.0;
    let rest = hamiltonian(params, x, th, &k0);
    let gxx = geometry::contravariant(params, x, th)[X][X];
    if rest > 0.0 || gxx <= 0.0 {
        return Err(Error::InvalidConstants(format!(
            "no real null Xi at x = {x}, theta = {th}"
        )));
    }
    Ok((-rest / gxx).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedQuantities {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Psi")]
    pub psi: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl ConservedQuantities {
    /// `calE(x) = E + a Phi/(x+a^2) + b Psi/(x+b^2)`.
    pub fn cal_e(&self, p: &BlackHoleParams, x: f64) -> f64 {
        self.e + p.a * self.phi / (x + p.a * p.a) + p.b * self.psi / (x + p.b * p.b)
    }
}

/// `Theta_pot(theta)`; along the flow `rho^4 thetadot^2 = Theta_pot`.
pub fn angular_potential(p: &BlackHoleParams, cq: &ConservedQuantities, th: f64) -> f64 {
    let (s, c) = th.sin_cos();
    cq.e * cq.e * (p.a * p.a * c * c + p.b * p.b * s * s) - cq.phi * cq.phi / (s * s)
        - cq.psi * cq.psi / (c * c)
        + cq.k
}

pub fn conserved_from_state(params: &BlackHoleParams, pp: &PhasePoint) -> Result<ConservedQuantities> {
    let th = pp.position.theta;
    let sc = th.sin() * th.cos();
    if !(th > 0.0 && th < std::f64::consts::FRAC_PI_2) || sc < 1e-12 {
        return Err(Error::CoordinateSingularity(format!("theta = {th}")));
    }
    let m = &pp.momentum;
    let mut cq = ConservedQuantities {
        e: -m.tau,
        phi: m.phi,
        psi: m.psi,
        k: 0.0,
    };
    // rho^2 thetadot = Theta
    cq.k = m.theta * m.theta - angular_potential(params, &cq, th);
    Ok(cq)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PotentialForm {
    /// Evaluated from the defining expression with `calE`.
    A,
    /// Evaluated from the expanded cubic.
    B,
}

/// The radial potential `X(x)`, a cubic in `x` with leading coefficient `E^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPotential {
    pub params: BlackHoleParams,
    pub cq: ConservedQuantities,
    /// `c[k]` multiplies `x^k`.
    pub c: [f64; 4],
}

impl RadialPotential {
    pub fn new(params: &BlackHoleParams, cq: &ConservedQuantities) -> Self {
        let (a, b, rs2) = (params.a, params.b, params.r_s * params.r_s);
        let (e, ph, ps, k) = (cq.e, cq.phi, cq.psi, cq.k);
        let (a2, b2) = (a * a, b * b);
        let c0 = e * e * a2 * b2 * rs2 + 2.0 * e * ph * a * b2 * rs2 + 2.0 * e * ps * a2 * b * rs2
            - k * a2 * b2
            + ph * ph * (a2 * b2 - b2 * b2 + b2 * rs2)
            + 2.0 * ph * ps * a * b * rs2
            + ps * ps * (a2 * b2 - a2 * a2 + a2 * rs2);
        let c1 = e * e * (a2 * b2 + a2 * rs2 + b2 * rs2)
            + 2.0 * e * rs2 * (ph * a + ps * b)
            + k * (rs2 - a2 - b2)
            + (ph * ph - ps * ps) * (a2 - b2);
        let c2 = e * e * (a2 + b2) - k;
        let c3 = e * e;
        RadialPotential {
            params: *params,
            cq: *cq,
            c: [c0, c1, c2, c3],
        }
    }

    pub fn eval(&self, x: f64, form: PotentialForm) -> f64 {
        match form {
            PotentialForm::B => roots::poly_eval(&self.c, x).0,
            PotentialForm::A => {
                let p = &self.params;
                let cq = &self.cq;
                let (a2, b2) = (p.a * p.a, p.b * p.b);
                let ce = cq.cal_e(p, x);
                p.delta(x)
                    * (cq.e * cq.e * x
                        + (a2 - b2) * (cq.phi * cq.phi / (x + a2) - cq.psi * cq.psi / (x + b2))
                        - cq.k)
                    + p.r_s * p.r_s * (x + a2) * (x + b2) * ce * ce
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        roots::poly_eval(&self.c, x).1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadialClass {
    /// No turning point outside the horizon with `X > 0` there.
    EscapeOnly,
    /// `E = 0`: one simple root beyond the horizon.
    SingleRightTurning(f64),
    /// Two simple roots; the band between them is forbidden.
    TwoTurningPoints(f64, f64),
    /// Coalesced pair: a trapped sphere at constant `x`.
    DoubleRoot(f64),
    /// No exterior allowed region.
    FallsIn,
}

pub fn radial_classification(params: &BlackHoleParams, cq: &ConservedQuantities) -> Result<RadialClass> {
    if cq.e == 0.0 && cq.k == 0.0 {
        return Err(Error::InvalidConstants("E = K = 0".into()));
    }
    if cq.e == 0.0 && cq.k < 0.0 {
        return Err(Error::InvalidConstants(format!("E = 0 requires K > 0, got {}", cq.k)));
    }
    let h = geometry::horizons(params)?;
    let pot = RadialPotential::new(params, cq);
    let rs2 = params.r_s * params.r_s;
    let tol = 1e-7 * rs2;
    let rts: Vec<f64> = roots::cubic(pot.c, tol)
        .into_iter()
        .filter(|&x| x > h.x_plus + 1e-12 * rs2)
        .collect();
    for w in rts.windows(2) {
        if (w[1] - w[0]).abs() < tol {
            return Ok(RadialClass::DoubleRoot(0.5 * (w[0] + w[1])));
        }
    }
    let at_horizon = pot.eval(h.x_plus, PotentialForm::B);
    if cq.e == 0.0 {
        return Ok(match rts.last() {
            Some(&x1) if at_horizon > 0.0 || rts.len() > 1 => RadialClass::SingleRightTurning(x1),
            _ => RadialClass::FallsIn,
        });
    }
    Ok(match rts.len() {
        0 => RadialClass::EscapeOnly,
        2 => RadialClass::TwoTurningPoints(rts[0], rts[1]),
        _ if at_horizon <= 0.0 && rts.len() == 1 => RadialClass::EscapeOnly,
        _ => RadialClass::TwoTurningPoints(rts[rts.len() - 2], rts[rts.len() - 1]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrappedSphere {
    pub x0: f64,
    pub k_hat: f64,
    pub newton_iters: usize,
}

/// Double root of `X` at `E = 1`, solving `X(x0) = X'(x0) = 0` for `(x0, K)`.
pub fn trapped_sphere(params: &BlackHoleParams, phi_hat: f64, psi_hat: f64) -> Result<TrappedSphere> {
    params.validate()?;
    let rs2 = params.r_s * params.r_s;
    let (mut x, mut k) = (2.0 * rs2, 4.0 * rs2);
    let pot_at = |k: f64| {
        RadialPotential::new(
            params,
            &ConservedQuantities { e: 1.0, phi: phi_hat, psi: psi_hat, k },
        )
    };
    for it in 1..=50 {
        // X = P - K Delta, so d/dK X = -Delta and d/dK X' = -Delta'
        let pot = pot_at(k);
        let (f, fx) = roots::poly_eval(&pot.c, x);
        let (_, fxx) = roots::poly_eval(&[pot.c[1], 2.0 * pot.c[2], 3.0 * pot.c[3]], x);
        let delta = params.delta(x);
        let ddelta = 2.0 * x + params.a * params.a + params.b * params.b - rs2;
        // Jacobian [[X', -Delta], [X'', -Delta']]
        let det = fx * -ddelta - (-delta) * fxx;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (f * -ddelta - (-delta) * fx) / det;
        let dk = (fx * fx - f * fxx) / det;
        x -= dx;
        k -= dk;
        if dx.abs() < 1e-15 * rs2 && dk.abs() < 1e-15 * rs2 {
            let h = geometry::horizons(params)?;
            if x <= h.x_plus {
                break;
            }
            return Ok(TrappedSphere { x0: x, k_hat: k, newton_iters: it });
        }
    }
    Err(Error::NoTrappedSphere(format!(
        "Newton did not converge for phi_hat = {phi_hat}, psi_hat = {psi_hat}"
    )))
}

/// Right-hand side of Hamilton's equations for `H = 1/2 g^{ab} p_a p_b`.
///
/// State layout: `[t, x, theta, phi, psi, tau, Xi, Theta, Phi, Psi]`.
pub fn hamilton_rhs(params: &BlackHoleParams, y: &[f64; 10]) -> [f64; 10] {
    let p = [y[5], y[6], y[7], y[8], y[9]];
    let gx = geometry::contravariant(params, Jet::<2>::var(y[1]), Jet::cst(y[2]));
    let gt = geometry::contravariant(params, Jet::<2>::cst(y[1]), Jet::var(y[2]));
    let mut out = [0.0; 10];
    let mut fx = 0.0;
    let mut ft = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            out[i] += gx[i][j].val() * p[j];
            fx += gx[i][j].0[1] * p[i] * p[j];
            ft += gt[i][j].0[1] * p[i] * p[j];
        }
    }
    out[5 + X] = -0.5 * fx;
    out[5 + TH] = -0.5 * ft;
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    HorizonCrossing,
    Escaped,
    StepUnderflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub lambda: f64,
    pub point: PhasePoint,
    pub p_residual: f64,
    pub k_drift: f64,
    /// `rho^4 xdot^2 - 4 X`, relative to `4 sum |c_k| x^k`.
    pub separated_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub termination: Termination,
    pub max_p_drift: f64,
    pub max_e_drift: f64,
    pub max_phi_drift: f64,
    pub max_psi_drift: f64,
    pub max_k_drift: f64,
    pub max_separated_residual: f64,
}

impl Trajectory {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "lambda", "t", "r", "theta", "phi", "psi", "tau", "xi", "Theta", "Phi", "Psi",
            "p_residual", "K_drift",
        ])?;
        for s in &self.samples {
            let (q, m) = (&s.point.position, &s.point.momentum);
            let row = [
                s.lambda,
                q.t,
                q.r(),
                q.theta,
                q.phi,
                q.psi,
                m.tau,
                m.xi_r(q.x),
                m.theta,
                m.phi,
                m.psi,
                s.p_residual,
                s.k_drift,
            ];
            wr.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GeodesicOptions {
    pub tol: f64,
    /// Stop once `r` exceeds this radius.
    pub r_escape: f64,
    pub h_max: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            tol: 1e-10,
            r_escape: 1e4,
            h_max: 0.05,
        }
    }
}

fn state_of(pp: &PhasePoint) -> [f64; 10] {
    let q = &pp.position;
    let m = &pp.momentum;
    [q.t, q.x, q.theta, q.phi, q.psi, m.tau, m.xi_x, m.theta, m.phi, m.psi]
}

fn point_of(y: &[f64; 10]) -> PhasePoint {
    PhasePoint {
        position: ChartPoint { t: y[0], x: y[1], theta: y[2], phi: y[3], psi: y[4] },
        momentum: Covector { tau: y[5], xi_x: y[6], theta: y[7], phi: y[8], psi: y[9] },
    }
}

pub fn integrate_geodesic(
    params: &BlackHoleParams,
    init: &PhasePoint,
    affine_span: f64,
    opts: GeodesicOptions,
) -> Result<Trajectory> {
    let h = geometry::horizons(params)?;
    let q = &init.position;
    if q.x <= h.x_plus {
        return Err(Error::CoordinateSingularity(format!("x = {} inside the outer horizon", q.x)));
    }
    let p0 = hamiltonian(params, q.x, q.theta, &init.momentum);
    let scale = init.momentum.as_array().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if p0.abs() > 1e-10 * scale * scale {
        return Err(Error::InvalidConstants(format!("initial data not null: p = {p0}")));
    }
    let cq0 = conserved_from_state(params, init)?;
    let pot = RadialPotential::new(params, &cq0);
    let rs2 = params.r_s * params.r_s;
    let x_stop = h.x_plus + 1e-6 * rs2;
    let x_esc = opts.r_escape * opts.r_escape;

    let mut samples = Vec::new();
    let mut termination = Termination::Completed;
    let mut maxes = [0.0f64; 6];
    let tol = Tolerance { rel: opts.tol, abs: opts.tol * 1e-2, h_max: opts.h_max };
    let res = ode::integrate(
        |y: &[f64; 10]| hamilton_rhs(params, y),
        0.0,
        state_of(init),
        affine_span,
        tol,
        |lam, y| {
            let pp = point_of(y);
            let (x, th) = (y[1], y[2]);
            let p = hamiltonian(params, x, th, &pp.momentum);
            let k_drift = conserved_from_state(params, &pp).map(|c| c.k - cq0.k).unwrap_or(f64::NAN);
            let rho2 = params.rho2(x, th);
            let xdot = 4.0 * params.delta(x) * y[6] / rho2;
            let lhs = rho2 * rho2 * xdot * xdot;
            let rhs = 4.0 * pot.eval(x, PotentialForm::B);
            let size: f64 = pot.c.iter().rev().fold(0.0, |acc, c| acc * x + c.abs());
            let sep = (lhs - rhs) / (4.0 * size).max(1e-300);
            let drifts = [
                p.abs(),
                (-y[5] - cq0.e).abs(),
                (y[8] - cq0.phi).abs(),
                (y[9] - cq0.psi).abs(),
                k_drift.abs(),
                sep.abs(),
            ];
            for (m, d) in maxes.iter_mut().zip(drifts) {
                *m = m.max(d);
            }
            samples.push(TrajectorySample {
                lambda: lam,
                point: pp,
                p_residual: p,
                k_drift,
                separated_residual: sep,
            });
            if x < x_stop {
                termination = Termination::HorizonCrossing;
                Control::Stop
            } else if x > x_esc {
                termination = Termination::Escaped;
                Control::Stop
            } else {
                Control::Continue
            }
        },
    );
    if res.is_none() {
        termination = Termination::StepUnderflow;
    }
    Ok(Trajectory {
        samples,
        termination,
        max_p_drift: maxes[0],
        max_e_drift: maxes[1],
        max_phi_drift: maxes[2],
        max_psi_drift: maxes[3],
        max_k_drift: maxes[4],
        max_separated_residual: maxes[5],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(a: f64, b: f64) -> BlackHoleParams {
        BlackHoleParams::new(1.0, a, b).unwrap()
    }

    #[test]
    fn conserved_k_matches_oracle() {
        let p = mp(0.05, 0.03);
        let mut k = Covector { tau: -1.0, xi_x: 0.0, theta: 0.2, phi: 0.1, psi: -0.05 };
        k.xi_x = null_xi(&p, 3.0, 1.0, &k).unwrap();
        let pp = PhasePoint {
            position: ChartPoint { t: 0.0, x: 3.0, theta: 1.0, phi: 0.0, psi: 0.0 },
            momentum: k,
        };
        let cq = conserved_from_state(&p, &pp).unwrap();
        assert!((cq.k - 0.061_319_543_795_648_53).abs() < 1e-15);
        // round trip: rho^4 thetadot^2 = Theta_pot
        let rho2 = p.rho2(3.0, 1.0);
        let thdot = geometry::contravariant(&p, 3.0, 1.0)[TH][TH] * k.theta;
        assert!((rho2 * rho2 * thdot * thdot - angular_potential(&p, &cq, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn radial_momentum_gives_zero_k() {
        let p = mp(0.0, 0.0);
        let pp = PhasePoint {
            position: ChartPoint { t: 0.0, x: 3.0, theta: 0.7, phi: 0.0, psi: 0.0 },
            momentum: Covector { tau: -1.0, xi_x: 0.3, theta: 0.0, phi: 0.0, psi: 0.0 },
        };
        assert_eq!(conserved_from_state(&p, &pp).unwrap().k, 0.0);
    }

    #[test]
    fn tangherlini_double_root_and_escape() {
        let p = mp(0.0, 0.0);
        let cq = ConservedQuantities { e: 1.0, phi: 0.0, psi: 0.0, k: 4.0 };
        match radial_classification(&p, &cq).unwrap() {
            RadialClass::DoubleRoot(x) => assert!((x - 2.0).abs() < 1e-7),
            c => panic!("{c:?}"),
        }
        let cq = ConservedQuantities { k: 3.9, ..cq };
        assert_eq!(radial_classification(&p, &cq).unwrap(), RadialClass::EscapeOnly);
        let cq = ConservedQuantities { k: 4.5, ..cq };
        assert!(matches!(
            radial_classification(&p, &cq).unwrap(),
            RadialClass::TwoTurningPoints(_, _)
        ));
    }

    #[test]
    fn zero_energy_turns_once() {
        let p = mp(0.05, 0.03);
        let cq = ConservedQuantities { e: 0.0, phi: 0.1, psi: 0.02, k: 0.5 };
        assert!(matches!(
            radial_classification(&p, &cq).unwrap(),
            RadialClass::SingleRightTurning(_)
        ));
        let zero = ConservedQuantities { e: 0.0, phi: 0.0, psi: 0.0, k: 0.0 };
        assert!(matches!(radial_classification(&p, &zero), Err(Error::InvalidConstants(_))));
    }

    #[test]
    fn trapped_sphere_matches_oracle() {
        let t = trapped_sphere(&mp(0.05, 0.03), 0.1, -0.05).unwrap();
        assert!((t.x0 - 2.000_099_124_612_032_5).abs() < 1e-10);
        assert!((t.k_hat - 4.003_599_500_024_795_6).abs() < 1e-10);
        let t0 = trapped_sphere(&mp(0.0, 0.0), 0.3, -0.2).unwrap();
        assert!((t0.x0 - 2.0).abs() < 1e-13 && (t0.k_hat - 4.0).abs() < 1e-13);
    }

    #[test]
    fn potential_forms_agree() {
        let p = mp(0.05, 0.03);
        let cq = ConservedQuantities { e: 0.8, phi: 0.3, psi: -0.2, k: 2.0 };
        let pot = RadialPotential::new(&p, &cq);
        for &x in &[0.5, 1.0, 2.0, 7.0] {
            let (fa, fb) = (pot.eval(x, PotentialForm::A), pot.eval(x, PotentialForm::B));
            assert!((fa - fb).abs() <= 1e-12 * fa.abs().max(1.0));
        }
    }

    #[test]
    fn forces_match_finite_differences() {
        let p = mp(0.05, 0.03);
        let y = [0.0, 2.3, 0.9, 0.0, 0.0, -1.0, 0.2, 0.4, 0.1, -0.05];
        let rhs = hamilton_rhs(&p, &y);
        let half_h = |x: f64, th: f64| {
            let k = Covector { tau: y[5], xi_x: y[6], theta: y[7], phi: y[8], psi: y[9] };
            0.5 * hamiltonian(&p, x, th, &k)
        };
        let rich = |f: &dyn Fn(f64) -> f64, h: f64| {
            let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
            (4.0 * d(h / 2.0) - d(h)) / 3.0
        };
        let fx = rich(&|e| half_h(2.3 + e, 0.9), 1e-3);
        let ft = rich(&|e| half_h(2.3, 0.9 + e), 1e-3);
        assert!((rhs[6] + fx).abs() < 1e-8 * fx.abs().max(1.0));
        assert!((rhs[7] + ft).abs() < 1e-8 * ft.abs().max(1.0));
    }
}
