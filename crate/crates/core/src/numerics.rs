//! Quadrature, finite-difference stencils and a classical Runge-Kutta stepper.

use crate::error::{Error, Result};

/// Composite Simpson over `[a, b]` with `panels` (rounded up to even) panels.
pub fn simpson<F>(a: f64, b: f64, panels: usize, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h)?;
    }
    let out = s * h / 3.0;
    if !out.is_finite() {
        return Err(Error::NonFinite("quadrature integrand".into()));
    }
    Ok(out)
}

/// Simpson weights for `n + 1` equally spaced samples (n even), times h.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even panel count");
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Integrates uniformly spaced samples; an odd panel count closes with the 3/8 rule.
pub fn simpson_samples(y: &[f64], h: f64) -> f64 {
    let n = y.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        _ if n % 2 == 0 => simpson_weights(n, h).iter().zip(y).map(|(w, v)| w * v).sum(),
        3 => 3.0 * h / 8.0 * (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3]),
        _ => {
            let m = n - 3;
            simpson_samples(&y[..=m], h) + simpson_samples(&y[m..], h)
        }
    }
}

/// Tensor-product Simpson over a rectangle.
pub fn simpson_2d<F>(u: (f64, f64), v: (f64, f64), panels: usize, mut f: F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let n = panels.max(2) + panels % 2;
    let hu = (u.1 - u.0) / n as f64;
    let hv = (v.1 - v.0) / n as f64;
    let wu = simpson_weights(n, hu);
    let wv = simpson_weights(n, hv);
    let mut s = 0.0;
    for (i, a) in wu.iter().enumerate() {
        let uu = u.0 + i as f64 * hu;
        for (j, b) in wv.iter().enumerate() {
            s += a * b * f(uu, v.0 + j as f64 * hv)?;
        }
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("surface integrand".into()));
    }
    Ok(s)
}

/// Five-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

pub fn gauss5<F: FnMut(f64) -> Result<f64>>(a: f64, b: f64, mut f: F) -> Result<f64> {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GAUSS5 {
        s += w * f(m + r * x)?;
    }
    Ok(s * r)
}

/// Nodes and weights of the composite five-point Gauss-Legendre rule with `cells` cells.
pub fn gauss5_nodes(a: f64, b: f64, cells: usize) -> Vec<(f64, f64)> {
    let cells = cells.max(1);
    let h = (b - a) / cells as f64;
    let mut out = Vec::with_capacity(5 * cells);
    for c in 0..cells {
        let m = a + (c as f64 + 0.5) * h;
        for (x, w) in GAUSS5 {
            out.push((m + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Fourth-order central first derivative of uniformly spaced samples at `i`.
pub fn d1_five_point(y: &[f64], i: usize, h: f64) -> Option<f64> {
    if i < 2 || i + 2 >= y.len() {
        return None;
    }
    Some((y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h))
}

/// Fourth-order central second derivative of uniformly spaced samples at `i`.
pub fn d2_five_point(y: &[f64], i: usize, h: f64) -> Option<f64> {
    if i < 2 || i + 2 >= y.len() {
        return None;
    }
    Some(
        (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2])
            / (12.0 * h * h),
    )
}

/// One classical RK4 step for y' = f(t, y).
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(k).map(|(x, d)| x + s * d).collect()
    };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h))?;
    let k4 = f(t + h, &axpy(y, &k3, h))?;
    let out: Vec<f64> = (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrator state".into()));
    }
    Ok(out)
}

/// Integrates with `steps` equal RK4 steps, returning every state including the first.
pub fn rk4_path<F>(mut f: F, t0: f64, y0: &[f64], h: f64, steps: usize) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0.to_vec());
    let mut y = y0.to_vec();
    for k in 0..steps {
        y = rk4_step(&mut f, t0 + k as f64 * h, &y, h)?;
        out.push(y.clone());
    }
    Ok(out)
}
