//! Smooth cutoffs built from `exp(-1/t)`.

use super::jet::Jet;
use super::quad;

fn e(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
pub fn step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = e(t);
        a / (a + e(1.0 - t))
    }
}

pub fn step_jet<const N: usize>(t: Jet<N>) -> Jet<N> {
    let x = t.val();
    if x <= 0.0 {
        Jet::cst(0.0)
    } else if x >= 1.0 {
        Jet::cst(1.0)
    } else {
        // S = 1 / (1 + exp(1/t - 1/(1-t)))
        let z = t.recip() - (-t + 1.0).recip();
        if z.val() > 700.0 {
            return Jet::cst(0.0);
        }
        (z.exp() + 1.0).recip()
    }
}

/// `ramp(y, w) = int_0^y step(s/w) ds`.
pub fn ramp(y: f64, w: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= w {
        y - 0.5 * w
    } else {
        quad::integrate(|s| step(s / w), 0.0, y, 1e-15)
    }
}

pub fn ramp_jet<const N: usize>(y: Jet<N>, w: f64) -> Jet<N> {
    let y0 = y.val();
    let outer = step_jet(Jet::<N>::var(y0) / w).integral(ramp(y0, w));
    y.compose(&outer.0)
}

/// Compactly supported bump on (-1, 1), not normalized.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Smooth symbol that vanishes on [0, 1] and equals 1 on [2, inf).
pub fn chi_ge1(s: f64) -> f64 {
    step(s - 1.0)
}
