use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::chart::Chart;
use super::jet::{Jet, Scalar, MAX_VARS};
use crate::error::{Error, Result};

type EvalFn<T> = dyn Fn(&[f64], u8) -> Result<Jet<T>> + Send + Sync;

/// A smooth function on a chart, evaluated as a jet to order <= 2.
#[derive(Clone)]
pub struct ScalarField<T: Scalar = f64> {
    dim: usize,
    eval: Arc<EvalFn<T>>,
}

impl<T: Scalar> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(dim = {})", self.dim)
    }
}

fn check_order(order: u8) -> Result<()> {
    if order > 2 {
        Err(Error::OrderTooHigh { requested: order })
    } else {
        Ok(())
    }
}

fn check_finite<T: Scalar>(j: Jet<T>) -> Result<Jet<T>> {
    if !j.value().is_finite() {
        return Err(Error::NonFinite(format!("field value {:?}", j.value())));
    }
    for g in j.gradient() {
        if !g.is_finite() {
            return Err(Error::NonFinite(format!("field derivative {:?}", g)));
        }
    }
    Ok(j)
}

impl<T: Scalar> ScalarField<T> {
    /// Field from a closure over seeded coordinate jets.
    pub fn from_jets<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet<T>]) -> Jet<T> + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            eval: Arc::new(move |p: &[f64], order: u8| {
                if p.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: p.len(),
                    });
                }
                check_order(order)?;
                if dim > MAX_VARS {
                    return Err(Error::TooManyVariables(dim));
                }
                let vals: Vec<T> = p.iter().map(|&x| T::from_real(x)).collect();
                let vars = Jet::variables(&vals, order);
                check_finite(f(&vars))
            }),
        }
    }

    /// Field from a raw evaluator; the closure receives the requested order.
    pub fn from_eval<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], u8) -> Result<Jet<T>> + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            eval: Arc::new(f),
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        ScalarField::from_jets(dim, move |_| Jet::constant(c))
    }

    pub fn zeroed(dim: usize) -> Self {
        ScalarField::constant(dim, T::zero())
    }

    pub fn coord(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        ScalarField::from_jets(dim, move |x| x[k])
    }

    /// Declares a singular locus; evaluation there fails instead of producing NaN.
    pub fn with_singular<P>(self, on_locus: P) -> Self
    where
        P: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        let dim = self.dim;
        ScalarField {
            dim,
            eval: Arc::new(move |p, o| {
                if p.len() == dim && on_locus(p) {
                    return Err(Error::SingularPoint);
                }
                inner(p, o)
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value, gradient and Hessian at `p` up to `order`.
    pub fn jet(&self, p: &[f64], order: u8) -> Result<Jet<T>> {
        Ok((self.eval)(p, order)?.widen(self.dim))
    }

    pub fn value(&self, p: &[f64]) -> Result<T> {
        Ok(self.jet(p, 0)?.value())
    }

    pub fn gradient_at(&self, p: &[f64]) -> Result<Vec<T>> {
        Ok(self.jet(p, 1)?.gradient())
    }

    /// Evaluates at jet-valued coordinates (composition with the chain rule).
    pub fn eval_jets(&self, x: &[Jet<T>]) -> Result<Jet<T>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let order = x.iter().map(|j| j.order()).min().unwrap_or(2);
        let p: Vec<f64> = x.iter().map(|j| j.value().re()).collect();
        let outer = self.jet(&p, order)?;
        Ok(outer.compose(x))
    }

    /// The partial derivative along coordinate `k` as a field.
    pub fn partial(&self, k: usize) -> Self {
        assert!(k < self.dim);
        let inner = self.eval.clone();
        ScalarField {
            dim: self.dim,
            eval: Arc::new(move |p, o| {
                check_order(o + 1)?;
                Ok(inner(p, o + 1)?.partial(k))
            }),
        }
    }

    /// Pointwise map through a jet function.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(Jet<T>) -> Jet<T> + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        ScalarField {
            dim: self.dim,
            eval: Arc::new(move |p, o| check_finite(f(inner(p, o)?))),
        }
    }

    pub fn zip_with<F>(&self, other: &Self, f: F) -> Self
    where
        F: Fn(Jet<T>, Jet<T>) -> Jet<T> + Send + Sync + 'static,
    {
        assert_eq!(self.dim, other.dim, "field dimension mismatch");
        let a = self.eval.clone();
        let b = other.eval.clone();
        ScalarField {
            dim: self.dim,
            eval: Arc::new(move |p, o| check_finite(f(a(p, o)?, b(p, o)?))),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(move |j| j.scale(c))
    }

    pub fn sum<'a, I>(dim: usize, fields: I) -> Self
    where
        I: IntoIterator<Item = &'a ScalarField<T>>,
    {
        fields
            .into_iter()
            .fold(ScalarField::zeroed(dim), |acc, f| &acc + f)
    }
}

impl ScalarField<f64> {
    /// Real field from a closure over seeded coordinate jets.
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet<f64>]) -> Jet<f64> + Send + Sync + 'static,
    {
        ScalarField::from_jets(dim, f)
    }

    pub fn zero(dim: usize) -> Self {
        ScalarField::zeroed(dim)
    }

    pub fn coordinate(dim: usize, k: usize) -> Self {
        ScalarField::coord(dim, k)
    }

    pub fn complexify(&self) -> ScalarField<Complex64> {
        let inner = self.eval.clone();
        ScalarField {
            dim: self.dim,
            eval: Arc::new(move |p, o| Ok(inner(p, o)?.to_complex())),
        }
    }
}

macro_rules! field_binop {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr<&ScalarField<T>> for &ScalarField<T> {
            type Output = ScalarField<T>;
            fn $m(self, rhs: &ScalarField<T>) -> ScalarField<T> {
                self.zip_with(rhs, |a, b| $tr::$m(a, b))
            }
        }
        impl<T: Scalar> $tr<ScalarField<T>> for ScalarField<T> {
            type Output = ScalarField<T>;
            fn $m(self, rhs: ScalarField<T>) -> ScalarField<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Scalar> $tr<&ScalarField<T>> for ScalarField<T> {
            type Output = ScalarField<T>;
            fn $m(self, rhs: &ScalarField<T>) -> ScalarField<T> {
                (&self).$m(rhs)
            }
        }
        impl<T: Scalar> $tr<ScalarField<T>> for &ScalarField<T> {
            type Output = ScalarField<T>;
            fn $m(self, rhs: ScalarField<T>) -> ScalarField<T> {
                self.$m(&rhs)
            }
        }
    };
}

field_binop!(Add, add);
field_binop!(Sub, sub);
field_binop!(Mul, mul);

impl<T: Scalar> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.map(|j| -j)
    }
}

impl<T: Scalar> Neg for ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        -&self
    }
}

/// Components of a vector field in the coordinate basis of a chart.
#[derive(Clone, Debug)]
pub struct VectorField<T: Scalar = f64> {
    chart: Chart,
    components: Vec<ScalarField<T>>,
}

impl<T: Scalar> VectorField<T> {
    pub fn new(chart: Chart, components: Vec<ScalarField<T>>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: components.len(),
            });
        }
        if let Some(c) = components.iter().find(|c| c.dim() != chart.dim()) {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: c.dim(),
            });
        }
        Ok(VectorField { chart, components })
    }

    /// Constant coordinate components.
    pub fn constant(chart: Chart, v: &[T]) -> Result<Self> {
        let n = chart.dim();
        let comps = v.iter().map(|&c| ScalarField::constant(n, c)).collect();
        VectorField::new(chart, comps)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarField<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField<T> {
        &self.components[i]
    }

    pub fn at(&self, p: &[f64]) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.value(p)).collect()
    }
}

type CurveFn = dyn Fn(Jet<f64>) -> Vec<Jet<f64>> + Send + Sync;

/// Parametrized curve in a chart; the closure receives the parameter as a jet.
#[derive(Clone)]
pub struct Curve {
    dim: usize,
    f: Arc<CurveFn>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve(dim = {})", self.dim)
    }
}

impl Curve {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(Jet<f64>) -> Vec<Jet<f64>> + Send + Sync + 'static,
    {
        Curve { dim, f: Arc::new(f) }
    }

    /// Straight segment from `a` to `b` over t in [0, 1].
    pub fn segment(a: &[f64], b: &[f64]) -> Self {
        let (a, b) = (a.to_vec(), b.to_vec());
        Curve::new(a.len(), move |t| {
            a.iter()
                .zip(&b)
                .map(|(&x0, &x1)| t * (x1 - x0) + x0)
                .collect()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        (self.f)(Jet::constant(t)).iter().map(|j| j.value()).collect()
    }

    pub fn point_and_velocity(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let xs = (self.f)(Jet::variable(t, 0, 1, 1));
        (
            xs.iter().map(|j| j.value()).collect(),
            xs.iter().map(|j| j.d(0)).collect(),
        )
    }
}

type PatchFn = dyn Fn(Jet<f64>, Jet<f64>) -> Vec<Jet<f64>> + Send + Sync;

/// Parametrized surface over a parameter rectangle.
#[derive(Clone)]
pub struct Patch {
    dim: usize,
    f: Arc<PatchFn>,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
}

impl fmt::Debug for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Patch(dim = {}, u = {:?}, v = {:?})", self.dim, self.u_range, self.v_range)
    }
}

impl Patch {
    pub fn new<F>(dim: usize, u_range: (f64, f64), v_range: (f64, f64), f: F) -> Self
    where
        F: Fn(Jet<f64>, Jet<f64>) -> Vec<Jet<f64>> + Send + Sync + 'static,
    {
        Patch {
            dim,
            f: Arc::new(f),
            u_range,
            v_range,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Point and the two tangent vectors at (u, v).
    pub fn frame(&self, u: f64, v: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let uv = Jet::variables(&[u, v], 1);
        let xs = (self.f)(uv[0], uv[1]);
        (
            xs.iter().map(|j| j.value()).collect(),
            xs.iter().map(|j| j.d(0)).collect(),
            xs.iter().map(|j| j.d(1)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_field_and_order_limit() {
        let f = ScalarField::new(2, |x| x[0] * x[0] * x[1]);
        let fx = f.partial(0);
        assert_eq!(fx.value(&[3.0, 2.0]).unwrap(), 12.0);
        assert_eq!(fx.jet(&[3.0, 2.0], 1).unwrap().gradient(), vec![4.0, 6.0]);
        assert!(matches!(fx.jet(&[3.0, 2.0], 2), Err(Error::OrderTooHigh { requested: 3 })));
        assert!(matches!(f.jet(&[3.0, 2.0], 3), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn singular_locus_is_an_error() {
        let f = ScalarField::new(3, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            r2.sqrt().recip()
        })
        .with_singular(|p| p.iter().all(|&v| v == 0.0));
        assert!(matches!(f.value(&[0.0, 0.0, 0.0]), Err(Error::SingularPoint)));
        assert!((f.value(&[0.0, 3.0, 4.0]).unwrap() - 0.2).abs() < 1e-16);
    }

    #[test]
    fn non_finite_is_reported() {
        let f = ScalarField::new(1, |x| x[0].ln());
        assert!(matches!(f.value(&[-1.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let f = ScalarField::coordinate(2, 0);
        assert!(matches!(f.value(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eval_jets_composes() {
        let f = ScalarField::new(2, |x| x[0] * x[1].sin());
        let t = Jet::variable(0.3, 0, 1, 2);
        let g = f.eval_jets(&[t * t, t.exp()]).unwrap();
        let direct = t * t * t.exp().sin();
        assert!((g.d(0) - direct.d(0)).abs() < 1e-14);
        assert!((g.dd(0, 0) - direct.dd(0, 0)).abs() < 1e-13);
    }

    #[test]
    fn curve_velocity() {
        let c = Curve::new(2, |t| vec![t.cos(), t.sin()]);
        let (p, v) = c.point_and_velocity(0.5);
        assert!((p[0] - 0.5f64.cos()).abs() < 1e-16);
        assert!((v[0] + 0.5f64.sin()).abs() < 1e-16);
    }
}
