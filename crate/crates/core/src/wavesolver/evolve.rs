use super::operator::{d1_fourth, ModeOperator, Scratch};
use super::{Forcing, ModeField};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest accepted `dt * speed_max / dr`.
pub const CFL_MAX: f64 = 1.0;

/// Field values at `r = r_e` after every step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub v: f64,
    pub u: f64,
    pub u_r: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct History {
    pub v: Vec<f64>,
    pub snapshots: Vec<ModeField>,
    /// Forcing at the snapshot times, empty when unforced.
    pub forcing: Vec<Vec<f64>>,
    pub trace: Vec<BoundaryTrace>,
}

fn trace(op: &ModeOperator, v: f64, u: &[f64], p: &[f64]) -> BoundaryTrace {
    let u_r = d1_fourth(&u[..5], op.spacing)[0];
    BoundaryTrace { v, u: u[0], u_r, w: op.inv_h[0] * p[0] + op.shift[0] * u_r }
}

fn snapshot(op: &ModeOperator, u: &[f64], p: &[f64]) -> ModeField {
    ModeField { u: u.to_vec(), w: op.velocity(u, p) }
}

pub fn evolve(op: &ModeOperator, init: ModeField, forcing: &Forcing) -> Result<History> {
    let dom = &op.dom;
    let n = op.len();
    let k = dom.k();
    let ratio = k * op.speed_max / op.spacing;
    if !(ratio <= CFL_MAX) {
        return Err(Error::Config(format!("CFL ratio {ratio:.4} exceeds {CFL_MAX}")));
    }
    if init.u.len() != n || init.w.len() != n {
        return Err(Error::Config(format!("initial data has {} points, grid has {n}", init.u.len())));
    }
    let scale = init.u.iter().chain(&init.w).fold(0.0f64, |m, x| m.max(x.abs()));
    if !scale.is_finite() {
        return Err(Error::InstabilityError { step: 0, reason: "non-finite initial data".into() });
    }
    let edge = [init.u[0], init.u[n - 1], init.w[0], init.w[n - 1]];
    if edge.iter().any(|x| x.abs() > 1e-6 * scale) {
        return Err(Error::Config("initial data not supported inside (r_e, r_max)".into()));
    }
    let f_r = (!forcing.is_none()).then(|| forcing.spatial(&op.r));
    let f_at = |v: f64| f_r.as_ref().map(|f| f.iter().map(|x| x * forcing.temporal(v)).collect::<Vec<f64>>());

    let steps = dom.steps();
    let cadence = dom.cadence();
    let mut hist = History { v: vec![0.0], snapshots: vec![init.clone()], forcing: vec![], trace: vec![] };
    if let Some(f) = f_at(0.0) {
        hist.forcing.push(f);
    }
    let mut u = init.u.clone();
    let mut p = op.momentum(&init.u, &init.w);
    hist.trace.push(trace(op, 0.0, &u, &p));

    let mut scratch = Scratch::new(n);
    let mut ku = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut kp = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let (mut tu, mut tp) = (vec![0.0; n], vec![0.0; n]);
    let limit = 1e100 * scale.max(1e-300);
    for step in 1..=steps {
        let v0 = (step - 1) as f64 * k;
        let stages = [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)];
        for (j, &(cf, ct)) in stages.iter().enumerate() {
            if j == 0 {
                tu.copy_from_slice(&u);
                tp.copy_from_slice(&p);
            } else {
                for i in 0..n {
                    tu[i] = u[i] + cf * k * ku[j - 1][i];
                    tp[i] = p[i] + cf * k * kp[j - 1][i];
                }
            }
            let f = f_at(v0 + ct * k);
            let (a, b) = (&mut ku[j], &mut kp[j]);
            op.rhs(&tu, &tp, f.as_deref(), a, b, &mut scratch);
        }
        let mut peak = 0.0f64;
        for i in 0..n {
            u[i] += k / 6.0 * (ku[0][i] + 2.0 * ku[1][i] + 2.0 * ku[2][i] + ku[3][i]);
            p[i] += k / 6.0 * (kp[0][i] + 2.0 * kp[1][i] + 2.0 * kp[2][i] + kp[3][i]);
            peak = peak.max(u[i].abs()).max(p[i].abs());
        }
        if !peak.is_finite() || peak > limit {
            return Err(Error::InstabilityError { step, reason: format!("max |u|, |P| = {peak:e}") });
        }
        let v = step as f64 * k;
        hist.trace.push(trace(op, v, &u, &p));
        if step % cadence == 0 || step == steps {
            hist.v.push(v);
            hist.snapshots.push(snapshot(op, &u, &p));
            if let Some(f) = f_at(v) {
                hist.forcing.push(f);
            }
        }
    }
    Ok(hist)
}
