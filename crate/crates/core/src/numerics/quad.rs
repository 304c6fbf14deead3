//! Adaptive Gauss-Kronrod (7, 15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

#[derive(PartialEq)]
struct Piece {
    a: f64,
    b: f64,
    v: f64,
    err: f64,
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

const MAX_PIECES: usize = 4000;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`, bisecting the
/// piece with the largest error estimate until the total estimate meets
/// `tol` or the piece budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (v, err) = gk15(&f, a, b);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Piece { a, b, v, err });
    let mut total_err = err;
    while total_err > tol && heap.len() < MAX_PIECES {
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            heap.push(p);
            break;
        }
        let (lv, le) = gk15(&f, p.a, m);
        let (rv, re) = gk15(&f, m, p.b);
        total_err += le + re - p.err;
        heap.push(Piece { a: p.a, b: m, v: lv, err: le });
        heap.push(Piece { a: m, b: p.b, v: rv, err: re });
    }
    heap.iter().map(|p| p.v).sum()
}

/// Integrate over consecutive breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, pts: &[f64], tol: f64) -> f64 {
    let n = pts.len().saturating_sub(1).max(1) as f64;
    pts.windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / n))
        .sum()
}

/// Composite trapezoid rule on sampled values with uniform spacing.
pub fn trapezoid(vals: &[f64], h: f64) -> f64 {
    match vals.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (vals[0] + vals[n - 1]) + vals[1..n - 1].iter().sum::<f64>()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14);
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn log_singular_endpoint() {
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12);
        assert!((v + 1.0).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let vals: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * 0.1 + 1.0).collect();
        assert!((trapezoid(&vals, 0.1) - 2.0).abs() < 1e-14);
    }
}
