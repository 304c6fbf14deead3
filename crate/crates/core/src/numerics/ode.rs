//! Adaptive Dormand-Prince 5(4) integrator for autonomous systems.

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub h_max: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-12,
            abs: 1e-13,
            h_max: 0.05,
        }
    }
}

/// Outcome reported by the step callback.
pub enum Control {
    Continue,
    Stop,
}

/// Integrate `y' = f(y)` from `t0` until `t_end` or until `on_step` stops.
///
/// `on_step` sees every accepted step. Returns the final `(t, y)`, or
/// `None` if the step size underflows.
pub fn integrate<const N: usize, F, S>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: Tolerance,
    mut on_step: S,
) -> Option<(f64, [f64; N])>
where
    F: Fn(&[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> Control,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = tol.h_max.min(1e-3).min(t_end - t0);
    let mut k = [[0.0; N]; 7];
    k[0] = f(&y);
    if let Control::Stop = on_step(t, &y) {
        return Some((t, y));
    }
    while t < t_end {
        h = h.min(t_end - t);
        if h < 1e-14 * t.abs().max(1.0) {
            return None;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    *yi += h * A[s][j] * k[j][i];
                }
            }
            k[s] = f(&ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + h * d5;
            let sc = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4) / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k[0] = k[6];
            if let Control::Stop = on_step(t, &y) {
                return Some((t, y));
            }
        }
        let fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        h = (h * fac.clamp(0.2, 5.0)).min(tol.h_max);
    }
    Some((t, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let tau = std::f64::consts::TAU;
        let (_, y) = integrate(
            |y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            tau,
            Tolerance::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn stop_callback_halts() {
        let (t, _) = integrate(
            |_: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            Tolerance::default(),
            |_, y| if y[0] > 1.0 { Control::Stop } else { Control::Continue },
        )
        .unwrap();
        assert!(t > 1.0 && t < 1.2);
    }
}
