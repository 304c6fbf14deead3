//! Real roots of low-degree polynomials.

/// Evaluate `sum c[k] x^k` and its derivative.
pub fn poly_eval(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = poly_eval(c, x);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        let nx = x - step;
        let (np, _) = poly_eval(c, nx);
        if np.abs() > p.abs() {
            break;
        }
        x = nx;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Real roots of `c0 + c1 x + c2 x^2`, sorted, with multiplicity.
pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    if c2 == 0.0 {
        if c1 == 0.0 {
            return vec![];
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / c2, c0 / q]
    };
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r
}

/// Real roots of `c[0] + c[1] x + c[2] x^2 + c[3] x^3`, sorted, with multiplicity.
///
/// Roots whose mutual distance is below `merge_tol` are reported as one
/// repeated root at their mean.
pub fn cubic(c: [f64; 4], merge_tol: f64) -> Vec<f64> {
    if c[3] == 0.0 {
        return quadratic(c[0], c[1], c[2]);
    }
    let a = c[2] / c[3];
    let b = c[1] / c[3];
    let d = c[0] / c[3];
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * d) / 54.0;
    let mut roots = if r * r < q * q * q {
        let th = (r / (q * q * q).sqrt()).clamp(-1.0, 1.0).acos();
        let s = -2.0 * q.sqrt();
        let tau = std::f64::consts::TAU;
        vec![
            s * (th / 3.0).cos() - a / 3.0,
            s * ((th + tau) / 3.0).cos() - a / 3.0,
            s * ((th - tau) / 3.0).cos() - a / 3.0,
        ]
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q * q * q).sqrt()).cbrt();
        let big_b = if big_a == 0.0 { 0.0 } else { q / big_a };
        let x1 = big_a + big_b - a / 3.0;
        // the complex pair may be a near-double real root
        let re = -0.5 * (big_a + big_b) - a / 3.0;
        let im = 0.5 * 3f64.sqrt() * (big_a - big_b);
        if im.abs() < merge_tol {
            vec![x1, re, re]
        } else {
            vec![x1]
        }
    };
    for x in roots.iter_mut() {
        *x = polish(&c, *x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 1..roots.len() {
        if (roots[i] - roots[i - 1]).abs() < merge_tol {
            let m = 0.5 * (roots[i] + roots[i - 1]);
            roots[i] = m;
            roots[i - 1] = m;
        }
    }
    roots
}

/// Newton iteration with bracketing fallback. `f` returns value and slope.
pub fn newton_bracketed<F: Fn(f64) -> (f64, f64)>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Option<(f64, usize)> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut x = x0.clamp(lo, hi);
    for it in 1..=max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some((x, it));
        }
        if fx.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let mut nx = x - fx / dfx;
        if !(nx > lo && nx < hi) || !nx.is_finite() {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() <= tol {
            return Some((nx, it));
        }
        x = nx;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_distinct_roots() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let r = cubic([6.0, -7.0, 0.0, 1.0], 1e-9);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn double_root_detected() {
        // x (x-2)^2 = x^3 - 4x^2 + 4x
        let r = cubic([0.0, 4.0, -4.0, 1.0], 1e-7);
        assert_eq!(r.len(), 3);
        assert!((r[1] - 2.0).abs() < 1e-7 && (r[2] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn one_real_root() {
        let r = cubic([1.0, 0.0, 0.0, 1.0], 1e-9);
        assert_eq!(r.len(), 1);
        assert!((r[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn newton_finds_sqrt2() {
        let (x, _) = newton_bracketed(|x| (x * x - 2.0, 2.0 * x), 0.0, 3.0, 1.0, 1e-15, 50).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }
}
