//! Second-order forward-mode jets.
//!
//! A jet carries a value, its gradient and the packed upper triangle of the
//! Hessian with respect to at most [`MAX_VARS`] seeded variables.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub const MAX_VARS: usize = 8;
const HESS_LEN: usize = MAX_VARS * (MAX_VARS + 1) / 2;

/// Scalar ring the jets are generic over (real or complex).
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    fn conj(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn conj(self) -> Self {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        Complex64::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
}

#[inline]
fn hidx(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T: Scalar = f64> {
    nvars: u8,
    order: u8,
    value: T,
    grad: [T; MAX_VARS],
    hess: [T; HESS_LEN],
}

impl<T: Scalar> Jet<T> {
    /// Constant: exact to every order, no variables.
    pub fn constant(value: T) -> Self {
        Jet {
            nvars: 0,
            order: 2,
            value,
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        }
    }

    /// Variable `index` out of `nvars`, tracked to `order`.
    pub fn variable(value: T, index: usize, nvars: usize, order: u8) -> Self {
        assert!(nvars <= MAX_VARS && index < nvars && order <= 2);
        let mut j = Jet {
            nvars: nvars as u8,
            order,
            value,
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        };
        if order >= 1 {
            j.grad[index] = T::one();
        }
        j
    }

    /// Seeds `values` as the full variable set.
    pub fn variables(values: &[T], order: u8) -> Vec<Self> {
        let n = values.len();
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n, order))
            .collect()
    }

    /// Builds a jet from raw parts; `hess` is a full symmetric `n x n` table.
    pub fn from_parts(value: T, grad: &[T], hess: &[Vec<T>], order: u8) -> Self {
        let n = grad.len();
        assert!(n <= MAX_VARS);
        let mut j = Jet {
            nvars: n as u8,
            order,
            value,
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        };
        j.grad[..n].copy_from_slice(grad);
        if order >= 2 {
            for b in 0..n {
                for a in 0..=b {
                    j.hess[hidx(a, b)] = hess[a][b];
                }
            }
        }
        j
    }

    pub fn value(&self) -> T {
        self.value
    }
    pub fn order(&self) -> u8 {
        self.order
    }
    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    /// First partial with respect to variable `i` (zero beyond the seeded set).
    pub fn d(&self, i: usize) -> T {
        if i < self.nvars as usize {
            self.grad[i]
        } else {
            T::zero()
        }
    }

    pub fn dd(&self, i: usize, j: usize) -> T {
        let n = self.nvars as usize;
        if i < n && j < n {
            self.hess[hidx(i, j)]
        } else {
            T::zero()
        }
    }

    pub fn gradient(&self) -> Vec<T> {
        self.grad[..self.nvars as usize].to_vec()
    }

    pub fn hessian(&self) -> Vec<Vec<T>> {
        let n = self.nvars as usize;
        (0..n)
            .map(|i| (0..n).map(|j| self.hess[hidx(i, j)]).collect())
            .collect()
    }

    /// The jet of the partial derivative along variable `k`, one order lower.
    pub fn partial(&self, k: usize) -> Self {
        debug_assert!(self.order >= 1);
        let n = self.nvars as usize;
        let mut out = Jet {
            nvars: self.nvars,
            order: self.order.saturating_sub(1),
            value: self.d(k),
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        };
        if out.order >= 1 && k < n {
            for i in 0..n {
                out.grad[i] = self.hess[hidx(k, i)];
            }
        }
        out
    }

    /// Extends the variable count to at least `n` (new partials are zero).
    pub fn widen(mut self, n: usize) -> Self {
        if n <= MAX_VARS && n > self.nvars as usize {
            self.nvars = n as u8;
        }
        self
    }

    /// Drops derivative information above `order`.
    pub fn truncate(mut self, order: u8) -> Self {
        if order < self.order {
            self.order = order;
            if order < 2 {
                self.hess = [T::zero(); HESS_LEN];
            }
            if order < 1 {
                self.grad = [T::zero(); MAX_VARS];
            }
        }
        self
    }

    fn lift(&self, f0: T, f1: T, f2: T) -> Self {
        let n = self.nvars as usize;
        let mut out = Jet {
            nvars: self.nvars,
            order: self.order,
            value: f0,
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        };
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = f1 * self.grad[i];
            }
        }
        if self.order >= 2 {
            for b in 0..n {
                for a in 0..=b {
                    let k = hidx(a, b);
                    out.hess[k] = f1 * self.hess[k] + f2 * self.grad[a] * self.grad[b];
                }
            }
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        self.lift(self.value * c, c, T::zero())
    }

    pub fn add_const(&self, c: T) -> Self {
        let mut out = *self;
        out.value += c;
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.lift(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let v = self.value;
        let r = T::one() / v;
        self.lift(v.ln(), r, -(r * r))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.lift(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.lift(c, -s, -c)
    }

    pub fn tan(&self) -> Self {
        self.sin() / self.cos()
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let half = T::from_real(0.5);
        let f1 = half / s;
        let f2 = -(f1 / (T::from_real(2.0) * self.value));
        self.lift(s, f1, f2)
    }

    pub fn powf(&self, p: f64) -> Self {
        let v = self.value;
        let pt = T::from_real(p);
        self.lift(
            v.powf(p),
            pt * v.powf(p - 1.0),
            pt * T::from_real(p - 1.0) * v.powf(p - 2.0),
        )
    }

    pub fn powi(&self, n: i32) -> Self {
        match n {
            0 => Jet::constant(T::one()).with_shape(self),
            1 => *self,
            2 => *self * *self,
            _ => {
                let v = self.value;
                let nt = T::from_real(n as f64);
                let f2 = if n == 1 {
                    T::zero()
                } else {
                    nt * T::from_real((n - 1) as f64) * v.powi(n - 2)
                };
                self.lift(v.powi(n), nt * v.powi(n - 1), f2)
            }
        }
    }

    pub fn recip(&self) -> Self {
        let r = T::one() / self.value;
        self.lift(r, -(r * r), T::from_real(2.0) * r * r * r)
    }

    fn with_shape(mut self, other: &Self) -> Self {
        self.nvars = other.nvars;
        self.order = other.order;
        self
    }

    fn combine_shape(a: &Self, b: &Self) -> (usize, u8) {
        (a.nvars.max(b.nvars) as usize, a.order.min(b.order))
    }

    pub fn conj(&self) -> Self {
        let mut out = *self;
        out.value = out.value.conj();
        for g in out.grad.iter_mut() {
            *g = g.conj();
        }
        for h in out.hess.iter_mut() {
            *h = h.conj();
        }
        out
    }

    /// Composes `self` (a jet in `inner.len()` variables) with inner jets
    /// expressing those variables in terms of new ones.
    pub fn compose(&self, inner: &[Jet<T>]) -> Self {
        let m = self.nvars as usize;
        assert!(inner.len() >= m);
        let order = inner.iter().fold(self.order, |o, j| o.min(j.order));
        let n = inner.iter().map(|j| j.nvars as usize).max().unwrap_or(0);
        let mut out = Jet {
            nvars: n as u8,
            order,
            value: self.value,
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        };
        if order >= 1 {
            for k in 0..n {
                let mut s = T::zero();
                for i in 0..m {
                    s += self.grad[i] * inner[i].d(k);
                }
                out.grad[k] = s;
            }
        }
        if order >= 2 {
            for b in 0..n {
                for a in 0..=b {
                    let mut s = T::zero();
                    for i in 0..m {
                        s += self.grad[i] * inner[i].dd(a, b);
                        for j in 0..m {
                            s += self.hess[hidx(i, j)] * inner[i].d(a) * inner[j].d(b);
                        }
                    }
                    out.hess[hidx(a, b)] = s;
                }
            }
        }
        out
    }
}

impl Jet<f64> {
    pub fn to_complex(&self) -> Jet<Complex64> {
        let mut out = Jet::<Complex64>::constant(Complex64::new(self.value, 0.0));
        out.nvars = self.nvars;
        out.order = self.order;
        for i in 0..MAX_VARS {
            out.grad[i] = Complex64::new(self.grad[i], 0.0);
        }
        for i in 0..HESS_LEN {
            out.hess[i] = Complex64::new(self.hess[i], 0.0);
        }
        out
    }

    pub fn atan(&self) -> Self {
        let v = self.value;
        let q = 1.0 / (1.0 + v * v);
        self.lift(v.atan(), q, -2.0 * v * q * q)
    }

    pub fn asin(&self) -> Self {
        let v = self.value;
        let r = 1.0 / (1.0 - v * v).sqrt();
        self.lift(v.asin(), r, v * r * r * r)
    }

    pub fn acos(&self) -> Self {
        let v = self.value;
        let r = 1.0 / (1.0 - v * v).sqrt();
        self.lift(v.acos(), -r, -v * r * r * r)
    }

    pub fn abs(&self) -> Self {
        if self.value < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(&self, x: &Self) -> Self {
        let y = self;
        let mut out = if x.value.abs() >= y.value.abs() {
            (*y / *x).atan()
        } else {
            -(*x / *y).atan()
        };
        out.value = y.value.atan2(x.value);
        out
    }
}

impl Jet<Complex64> {
    pub fn re(&self) -> Jet<f64> {
        let mut out = Jet::<f64>::constant(self.value.re);
        out.nvars = self.nvars;
        out.order = self.order;
        for i in 0..MAX_VARS {
            out.grad[i] = self.grad[i].re;
        }
        for i in 0..HESS_LEN {
            out.hess[i] = self.hess[i].re;
        }
        out
    }

    pub fn im(&self) -> Jet<f64> {
        (*self * Complex64::new(0.0, -1.0)).re()
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (n, order) = Jet::combine_shape(&self, &rhs);
        let mut out = self;
        out.nvars = n as u8;
        out.order = order;
        out.value = self.value + rhs.value;
        for i in 0..n {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        for k in 0..n * (n + 1) / 2 {
            out.hess[k] = self.hess[k] + rhs.hess[k];
        }
        out.truncate(order)
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        out.value = -out.value;
        for g in out.grad.iter_mut() {
            *g = -*g;
        }
        for h in out.hess.iter_mut() {
            *h = -*h;
        }
        out
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (n, order) = Jet::combine_shape(&self, &rhs);
        let (a, b) = (&self, &rhs);
        let mut out = Jet {
            nvars: n as u8,
            order,
            value: a.value * b.value,
            grad: [T::zero(); MAX_VARS],
            hess: [T::zero(); HESS_LEN],
        };
        if order >= 1 {
            for i in 0..n {
                out.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
            }
        }
        if order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    let k = hidx(i, j);
                    out.hess[k] = a.value * b.hess[k]
                        + b.value * a.hess[k]
                        + a.grad[i] * b.grad[j]
                        + a.grad[j] * b.grad[i];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Scalar> AddAssign for Jet<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Jet<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Jet<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

macro_rules! scalar_ops {
    ($jt:ty, $st:ty, $conv:expr) => {
        impl Add<$st> for Jet<$jt> {
            type Output = Jet<$jt>;
            fn add(self, rhs: $st) -> Jet<$jt> {
                self.add_const($conv(rhs))
            }
        }
        impl Add<Jet<$jt>> for $st {
            type Output = Jet<$jt>;
            fn add(self, rhs: Jet<$jt>) -> Jet<$jt> {
                rhs.add_const($conv(self))
            }
        }
        impl Sub<$st> for Jet<$jt> {
            type Output = Jet<$jt>;
            fn sub(self, rhs: $st) -> Jet<$jt> {
                self.add_const(-$conv(rhs))
            }
        }
        impl Sub<Jet<$jt>> for $st {
            type Output = Jet<$jt>;
            fn sub(self, rhs: Jet<$jt>) -> Jet<$jt> {
                (-rhs).add_const($conv(self))
            }
        }
        impl Mul<$st> for Jet<$jt> {
            type Output = Jet<$jt>;
            fn mul(self, rhs: $st) -> Jet<$jt> {
                self.scale($conv(rhs))
            }
        }
        impl Mul<Jet<$jt>> for $st {
            type Output = Jet<$jt>;
            fn mul(self, rhs: Jet<$jt>) -> Jet<$jt> {
                rhs.scale($conv(self))
            }
        }
        impl Div<$st> for Jet<$jt> {
            type Output = Jet<$jt>;
            fn div(self, rhs: $st) -> Jet<$jt> {
                self.scale(<$jt as Scalar>::one() / $conv(rhs))
            }
        }
        impl Div<Jet<$jt>> for $st {
            type Output = Jet<$jt>;
            fn div(self, rhs: Jet<$jt>) -> Jet<$jt> {
                rhs.recip().scale($conv(self))
            }
        }
    };
}

scalar_ops!(f64, f64, |x: f64| x);
scalar_ops!(Complex64, Complex64, |x: Complex64| x);
scalar_ops!(Complex64, f64, |x: f64| Complex64::new(x, 0.0));

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_and_hessian() {
        let v = Jet::variables(&[1.0, 2.0, 3.0], 2);
        let f = v[0] - v[1] + v[0] * v[1] * v[2];
        assert_eq!(f.gradient(), vec![7.0, 2.0, 2.0]);
        let h = f.hessian();
        assert_eq!(h[0][1], 3.0);
        assert_eq!(h[0][2], 2.0);
        assert_eq!(h[1][2], 1.0);
        assert_eq!(h[0][0], 0.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Jet::variable(0.7, 0, 1, 2);
        let s = x.sin();
        assert!(close(s.d(0), 0.7f64.cos(), 1e-15));
        assert!(close(s.dd(0, 0), -0.7f64.sin(), 1e-15));
        let r = x.sqrt();
        assert!(close(r.dd(0, 0), -0.25 * 0.7f64.powf(-1.5), 1e-14));
        let p = x.powf(3.5);
        assert!(close(p.dd(0, 0), 3.5 * 2.5 * 0.7f64.powf(1.5), 1e-14));
        let q = x.powi(5);
        assert!(close(q.dd(0, 0), 20.0 * 0.7f64.powi(3), 1e-14));
        let a = x.acos();
        assert!(close(a.d(0), -1.0 / (1.0 - 0.49f64).sqrt(), 1e-14));
    }

    #[test]
    fn atan2_branches_agree() {
        for &(y, x) in &[(0.3, -2.0), (2.0, 0.1), (-1.5, -0.2), (0.5, 0.5)] {
            let v = Jet::variables(&[y, x], 2);
            let a = v[0].atan2(&v[1]);
            let r2 = x * x + y * y;
            assert!(close(a.value(), f64::atan2(y, x), 1e-15));
            assert!(close(a.d(0), x / r2, 1e-14));
            assert!(close(a.d(1), -y / r2, 1e-14));
            assert!(close(a.dd(0, 0), -2.0 * x * y / (r2 * r2), 1e-13));
        }
    }

    #[test]
    fn partial_lowers_order() {
        let v = Jet::variables(&[1.5, -0.5], 2);
        let f = v[0] * v[0] * v[1];
        let fx = f.partial(0);
        assert_eq!(fx.order(), 1);
        assert_eq!(fx.value(), 2.0 * 1.5 * -0.5);
        assert_eq!(fx.gradient(), vec![2.0 * -0.5, 2.0 * 1.5]);
    }

    #[test]
    fn compose_is_chain_rule() {
        // outer g(a,b) = a*b^2 ; inner a = sin t, b = t^2
        let t = Jet::variable(0.4, 0, 1, 2);
        let inner = [t.sin(), t * t];
        let ab = Jet::variables(&[inner[0].value(), inner[1].value()], 2);
        let outer = ab[0] * ab[1] * ab[1];
        let c = outer.compose(&inner);
        let direct = inner[0] * inner[1] * inner[1];
        assert!(close(c.value(), direct.value(), 1e-15));
        assert!(close(c.d(0), direct.d(0), 1e-14));
        assert!(close(c.dd(0, 0), direct.dd(0, 0), 1e-13));
    }

    #[test]
    fn complex_jets() {
        let x = Jet::variable(Complex64::new(0.3, 0.0), 0, 1, 2);
        let e = (x * Complex64::new(0.0, 2.0)).exp();
        let expect = Complex64::new(0.0, 2.0) * Complex64::new(0.0, 0.6).exp();
        assert!((e.d(0) - expect).norm() < 1e-15);
        assert!((e.dd(0, 0) - Complex64::new(-4.0, 0.0) * Complex64::new(0.0, 0.6).exp()).norm() < 1e-14);
    }
}
