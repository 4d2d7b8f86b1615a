use super::chart::Chart;
use super::field::{ScalarField, VectorField};
use super::jet::Scalar;
use crate::error::{Error, Result};

fn require_dim<T: Scalar>(v: &VectorField<T>, n: usize) -> Result<()> {
    if v.chart().dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.chart().dim(),
        });
    }
    Ok(())
}

pub fn gradient<T: Scalar>(f: &ScalarField<T>, p: &[f64]) -> Result<Vec<T>> {
    f.gradient_at(p)
}

pub fn gradient_field<T: Scalar>(chart: &Chart, f: &ScalarField<T>) -> Result<VectorField<T>> {
    let comps = (0..chart.dim()).map(|k| f.partial(k)).collect();
    VectorField::new(chart.clone(), comps)
}

/// Sum of coordinate partials of the components.
pub fn divergence<T: Scalar>(v: &VectorField<T>, p: &[f64]) -> Result<T> {
    v.chart().check_point(p)?;
    let mut s = T::zero();
    for (k, c) in v.components().iter().enumerate() {
        s += c.jet(p, 1)?.d(k);
    }
    Ok(s)
}

pub fn divergence_field<T: Scalar>(v: &VectorField<T>) -> ScalarField<T> {
    let n = v.chart().dim();
    let parts: Vec<ScalarField<T>> = v
        .components()
        .iter()
        .enumerate()
        .map(|(k, c)| c.partial(k))
        .collect();
    ScalarField::sum(n, parts.iter())
}

/// Curl of a vector field on a three-dimensional chart.
pub fn curl<T: Scalar>(v: &VectorField<T>, p: &[f64]) -> Result<[T; 3]> {
    require_dim(v, 3)?;
    v.chart().check_point(p)?;
    let g: Vec<Vec<T>> = v
        .components()
        .iter()
        .map(|c| c.gradient_at(p))
        .collect::<Result<_>>()?;
    Ok([
        g[2][1] - g[1][2],
        g[0][2] - g[2][0],
        g[1][0] - g[0][1],
    ])
}

pub fn curl_field<T: Scalar>(v: &VectorField<T>) -> Result<VectorField<T>> {
    require_dim(v, 3)?;
    let c = v.components();
    let comps = vec![
        c[2].partial(1) - c[1].partial(2),
        c[0].partial(2) - c[2].partial(0),
        c[1].partial(0) - c[0].partial(1),
    ];
    VectorField::new(v.chart().clone(), comps)
}

/// Signature-weighted trace of the Hessian (the wave operator on spacetime charts).
pub fn laplacian<T: Scalar>(chart: &Chart, f: &ScalarField<T>, p: &[f64]) -> Result<T> {
    chart.check_point(p)?;
    let j = f.jet(p, 2)?;
    let mut s = T::zero();
    for (k, &sig) in chart.signature().iter().enumerate() {
        s += j.dd(k, k) * T::from_real(sig as f64);
    }
    Ok(s)
}
