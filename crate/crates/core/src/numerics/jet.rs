//! Truncated Taylor arithmetic.
//!
//! A `Jet<N>` stores the first `N` Taylor coefficients `c_k = f^(k)(x0)/k!`
//! of a function around a point. Arithmetic and elementary functions act on
//! the truncated series, so derivatives up to order `N-1` come out exact to
//! rounding.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize>(pub [f64; N]);

impl<const N: usize> Jet<N> {
    pub fn cst(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet(c)
    }

    /// The identity function at `x0`.
    pub fn var(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        if N > 1 {
            c[1] = 1.0;
        }
        Jet(c)
    }

    pub fn val(&self) -> f64 {
        self.0[0]
    }

    /// k-th derivative at the expansion point.
    pub fn d(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.0[k] * fact
    }

    /// Derivative as a jet. The top coefficient is lost and set to zero.
    pub fn deriv(&self) -> Self {
        let mut c = [0.0; N];
        for k in 1..N {
            c[k - 1] = k as f64 * self.0[k];
        }
        Jet(c)
    }

    /// Antiderivative with prescribed value at the expansion point.
    pub fn integral(&self, v0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v0;
        for k in 1..N {
            c[k] = self.0[k - 1] / k as f64;
        }
        Jet(c)
    }

    /// Compose an outer function, given by its Taylor coefficients at
    /// `self.val()`, with this jet.
    pub fn compose(&self, outer: &[f64; N]) -> Self {
        let mut h = *self;
        h.0[0] = 0.0;
        let mut acc = Self::cst(outer[N - 1]);
        for k in (0..N - 1).rev() {
            acc *= h;
            acc.0[0] += outer[k];
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.val().exp();
        let mut o = [0.0; N];
        let mut fact = 1.0;
        for (k, ok) in o.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *ok = e / fact;
        }
        self.compose(&o)
    }

    pub fn ln(&self) -> Self {
        let x = self.val();
        let mut o = [0.0; N];
        o[0] = x.ln();
        let mut p = 1.0;
        for (k, ok) in o.iter_mut().enumerate().skip(1) {
            p /= x;
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ok = s * p / k as f64;
        }
        self.compose(&o)
    }

    /// Real power `x^p` for positive base.
    pub fn powf(&self, p: f64) -> Self {
        let x = self.val();
        let mut o = [0.0; N];
        let mut binom = 1.0;
        let mut xp = x.powf(p);
        for (k, ok) in o.iter_mut().enumerate() {
            if k > 0 {
                binom *= (p - (k - 1) as f64) / k as f64;
                xp /= x;
            }
            *ok = binom * xp;
        }
        self.compose(&o)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n >= 0 {
            let mut acc = Self::cst(1.0);
            for _ in 0..n {
                acc *= *self;
            }
            acc
        } else {
            self.powi(-n).recip()
        }
    }

    pub fn recip(&self) -> Self {
        let x = self.val();
        let mut o = [0.0; N];
        let mut p = 1.0 / x;
        for (k, ok) in o.iter_mut().enumerate() {
            *ok = if k % 2 == 0 { p } else { -p };
            p /= x;
        }
        self.compose(&o)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.val().sin_cos();
        let mut o = [0.0; N];
        let mut fact = 1.0;
        for (k, ok) in o.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let v = match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            *ok = v / fact;
        }
        self.compose(&o)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.val().sin_cos();
        let mut o = [0.0; N];
        let mut fact = 1.0;
        for (k, ok) in o.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let v = match k % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            };
            *ok = v / fact;
        }
        self.compose(&o)
    }

    /// Evaluate the truncated series at offset `h`.
    pub fn eval(&self, h: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * h + c)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] += o.0[k];
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] -= o.0[k];
        }
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(c)
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        // c = a/b solves b*c = a term by term
        let mut c = [0.0; N];
        let b0 = o.0[0];
        for k in 0..N {
            let mut s = self.0[k];
            for j in 1..=k {
                s -= o.0[j] * c[k - j];
            }
            c[k] = s / b0;
        }
        Jet(c)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for k in 0..N {
            self.0[k] = -self.0[k];
        }
        self
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.0[0] += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.0[0] -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        for k in 0..N {
            self.0[k] *= o;
        }
        self
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<const N: usize> MulAssign for Jet<N> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

/// Scalar types that the geometry formulas are generic over.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn recip(&self) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
}

impl<const N: usize> Scalar for Jet<N> {
    fn cst(v: f64) -> Self {
        Jet::cst(v)
    }
    fn val(&self) -> f64 {
        self.0[0]
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
}
