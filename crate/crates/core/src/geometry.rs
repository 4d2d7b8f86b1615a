//! Metrics, Christoffel symbols, geodesics, parallel transport, holonomy,
//! Jacobi deviation and curvature. Everything is in coordinate frames.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::chartcalc::{Chart, Curve, Jet, ScalarField, MAX_VARS};
use crate::error::{Error, Result};
use crate::numerics::rk4_path;

type MetricFn = dyn Fn(&[Jet]) -> Result<Vec<Vec<Jet>>> + Send + Sync;
type LocusFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// Sphere charts stay this far from the poles.
pub const POLE_GUARD: f64 = 1e-6;

/// Symmetric metric g_{ij}(p); only the upper triangle of the closure's table is read.
#[derive(Clone)]
pub struct MetricField {
    chart: Chart,
    g: Arc<MetricFn>,
    singular: Option<Arc<LocusFn>>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricField({:?})", self.chart.names())
    }
}

impl MetricField {
    pub fn new<F>(chart: Chart, g: F) -> Result<Self>
    where
        F: Fn(&[Jet]) -> Result<Vec<Vec<Jet>>> + Send + Sync + 'static,
    {
        if chart.dim() == 0 || chart.dim() > MAX_VARS {
            return Err(Error::TooManyVariables(chart.dim()));
        }
        Ok(MetricField {
            chart,
            g: Arc::new(g),
            singular: None,
        })
    }

    pub fn with_singular<P: Fn(&[f64]) -> bool + Send + Sync + 'static>(mut self, on_locus: P) -> Self {
        self.singular = Some(Arc::new(on_locus));
        self
    }

    pub fn constant(chart: Chart, table: Vec<Vec<f64>>) -> Result<Self> {
        let n = chart.dim();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: table.len(),
            });
        }
        MetricField::new(chart, move |_| {
            Ok(table.iter().map(|r| r.iter().map(|&v| Jet::constant(v)).collect()).collect())
        })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        let table = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        MetricField::constant(Chart::euclidean(n), table)
    }

    /// Round sphere of radius rho in (phi, theta): diag(rho^2, rho^2 sin^2 phi).
    pub fn sphere(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        let r2 = rho * rho;
        Ok(MetricField::new(Chart::sphere(), move |p| {
            let s = p[0].sin();
            Ok(vec![
                vec![Jet::constant(r2), Jet::constant(0.0)],
                vec![Jet::constant(0.0), s * s * r2],
            ])
        })?
        .with_singular(|p| !(p[0] > POLE_GUARD && p[0] < std::f64::consts::PI - POLE_GUARD)))
    }

    /// Flat plane in polar coordinates (r, theta): diag(1, r^2).
    pub fn polar() -> Result<Self> {
        let chart = Chart::new(&["r", "theta"], &[1, 1])?;
        Ok(MetricField::new(chart, |p| {
            Ok(vec![
                vec![Jet::constant(1.0), Jet::constant(0.0)],
                vec![Jet::constant(0.0), p[0] * p[0]],
            ])
        })?
        .with_singular(|p| !(p[0] > 0.0)))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        self.chart.check_point(p)?;
        if let Some(s) = &self.singular {
            if s(p) {
                return Err(Error::SingularPoint);
            }
        }
        Ok(())
    }

    /// Metric components as jets over the point variables.
    pub fn jets(&self, p: &[Jet]) -> Result<Vec<Vec<Jet>>> {
        let vals: Vec<f64> = p.iter().map(|j| j.value()).collect();
        self.check(&vals)?;
        let n = self.dim();
        let raw = (self.g)(p)?;
        if raw.len() != n || raw.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: raw.len(),
            });
        }
        let mut out = raw.clone();
        for i in 0..n {
            for j in 0..i {
                out[i][j] = raw[j][i];
            }
        }
        for row in &out {
            for c in row {
                if !c.value().is_finite() {
                    return Err(Error::NonFinite("metric component".into()));
                }
            }
        }
        Ok(out)
    }

    pub fn at(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        let pj: Vec<Jet> = p.iter().map(|&v| Jet::constant(v)).collect();
        Ok(self.jets(&pj)?.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect())
    }

    pub fn inner(&self, p: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let g = self.at(p)?;
        Ok(quad(&g, u, v))
    }

    /// sqrt(|g(v, v)|).
    pub fn norm(&self, p: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.inner(p, v, v)?.abs().sqrt())
    }
}

fn quad(g: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in 0..v.len() {
            s += g[i][j] * u[i] * v[j];
        }
    }
    s
}

fn invert(mut a: Vec<Vec<Jet>>) -> Result<Vec<Vec<Jet>>> {
    let n = a.len();
    let scale = a.iter().flatten().fold(0.0f64, |s, j| s.max(j.value().abs()));
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| Jet::constant(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].value().abs().total_cmp(&a[y][col].value().abs()))
            .expect("non-empty");
        if !(a[piv][col].value().abs() > 1e-14 * scale) {
            return Err(Error::SingularPoint);
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = a[col][j] * r;
            inv[col][j] = inv[col][j] * r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col];
            if f.value() == 0.0 && f.order() == 0 {
                continue;
            }
            for j in 0..n {
                a[i][j] = a[i][j] - f * a[col][j];
                inv[i][j] = inv[i][j] - f * inv[col][j];
            }
        }
    }
    Ok(inv)
}

/// Gamma^c_{ab} as jets, indexed [c][a][b]; one order below the point jets.
pub fn christoffel_jets(g: &MetricField, p: &[Jet]) -> Result<Vec<Vec<Vec<Jet>>>> {
    let n = g.dim();
    let gj = g.jets(p)?;
    let ginv = invert(gj.clone())?;
    // dg[k][i][j] = d_k g_ij
    let dg: Vec<Vec<Vec<Jet>>> = (0..n)
        .map(|k| (0..n).map(|i| (0..n).map(|j| gj[i][j].partial(k)).collect()).collect())
        .collect();
    let mut out = vec![vec![vec![Jet::constant(0.0); n]; n]; n];
    for c in 0..n {
        for a in 0..n {
            for b in a..n {
                let mut s = Jet::constant(0.0);
                for l in 0..n {
                    let t = dg[b][l][a] + dg[a][b][l] - dg[l][a][b];
                    s += ginv[l][c] * t;
                }
                let s = s * 0.5;
                out[c][a][b] = s;
                out[c][b][a] = s;
            }
        }
    }
    Ok(out)
}

/// Gamma^c_{ab} at a point, indexed [c][a][b].
pub fn christoffel(g: &MetricField, p: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let pj = Jet::variables(p, 1);
    Ok(christoffel_jets(g, &pj)?
        .iter()
        .map(|m| m.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect())
        .collect())
}

fn contract(gamma: &[Vec<Vec<f64>>], u: &[f64], v: &[f64]) -> Vec<f64> {
    gamma.iter().map(|m| quad(m, u, v)).collect()
}

/// Position, velocity and arc parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicState {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub s: f64,
}

impl GeodesicState {
    pub fn new(position: &[f64], velocity: &[f64]) -> Self {
        GeodesicState {
            position: position.to_vec(),
            velocity: velocity.to_vec(),
            s: 0.0,
        }
    }
}

/// Samples of a position and a carried vector against a parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct History {
    pub s: Vec<f64>,
    pub position: Vec<Vec<f64>>,
    pub vector: Vec<Vec<f64>>,
}

impl History {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn last_vector(&self) -> &[f64] {
        self.vector.last().expect("non-empty history")
    }

    pub fn last_position(&self) -> &[f64] {
        self.position.last().expect("non-empty history")
    }

    /// Columns s, positions, vector components.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n = self.position.first().map_or(0, |p| p.len());
        let m = self.vector.first().map_or(0, |v| v.len());
        let mut header = vec!["s".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..m).map(|i| format!("v{i}")));
        out.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.s[i].to_string()];
            row.extend(self.position[i].iter().map(|v| v.to_string()));
            row.extend(self.vector[i].iter().map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Fixed-step settings shared by the integrators. The run is repeated at half
/// step; it is rejected when the conserved norm of the two runs differs by more
/// than `guard_factor * h^4 * length` (relative, floored at 1e-12).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepControl {
    pub step: f64,
    pub guard_factor: f64,
}

impl StepControl {
    pub fn new(step: f64) -> Self {
        StepControl { step, guard_factor: 10.0 }
    }

    /// Default step: 1e-4 of the parameter length.
    pub fn for_length(length: f64) -> Self {
        StepControl::new(1e-4 * length.abs())
    }

    fn guard(&self, h: f64, length: f64) -> f64 {
        (self.guard_factor * h.powi(4) * length.abs()).max(1e-12)
    }
}

fn geodesic_run(g: &MetricField, ics: &GeodesicState, h: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    let n = g.dim();
    let mut y0 = ics.position.clone();
    y0.extend_from_slice(&ics.velocity);
    rk4_path(
        |_, y| {
            let gamma = christoffel(g, &y[..n])?;
            let acc = contract(&gamma, &y[n..], &y[n..]);
            let mut dy = y[n..].to_vec();
            dy.extend(acc.iter().map(|a| -a));
            Ok(dy)
        },
        ics.s,
        &y0,
        h,
        steps,
    )
}

fn steps_for(length: f64, h: f64) -> Result<(usize, f64)> {
    if !(h > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let steps = (length.abs() / h).round().max(1.0) as usize;
    Ok((steps, length / steps as f64))
}

/// RK4 geodesic from `ics` to parameter `s_end`; the carried vector is the velocity.
pub fn integrate_geodesic(g: &MetricField, ics: &GeodesicState, s_end: f64, ctl: StepControl) -> Result<History> {
    let n = g.dim();
    if ics.position.len() != n || ics.velocity.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ics.velocity.len(),
        });
    }
    if ics.velocity.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial velocity".into()));
    }
    let length = s_end - ics.s;
    let (steps, h) = steps_for(length, ctl.step)?;
    let coarse = geodesic_run(g, ics, h, steps)?;
    let fine = geodesic_run(g, ics, 0.5 * h, 2 * steps)?;
    let (a, b) = (coarse.last().expect("states"), fine.last().expect("states"));
    let na = g.inner(&a[..n], &a[n..], &a[n..])?;
    let nb = g.inner(&b[..n], &b[n..], &b[n..])?;
    let n0 = g.inner(&ics.position, &ics.velocity, &ics.velocity)?.abs().max(1e-300);
    let drift = (na - nb).abs() / n0;
    let guard = ctl.guard(h, length);
    if drift > guard {
        return Err(Error::StepTooLarge { drift, guard });
    }
    Ok(History {
        s: (0..=steps).map(|k| ics.s + k as f64 * h).collect(),
        position: coarse.iter().map(|y| y[..n].to_vec()).collect(),
        vector: coarse.iter().map(|y| y[n..].to_vec()).collect(),
    })
}

fn transport_run(g: &MetricField, x0: &[f64], curve: &Curve, t0: f64, h: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    rk4_path(
        |t, x| {
            let (p, v) = curve.point_and_velocity(t);
            let gamma = christoffel(g, &p)?;
            Ok(contract(&gamma, &v, x).iter().map(|a| -a).collect())
        },
        t0,
        x0,
        h,
        steps,
    )
}

/// Carries `v0` along `curve` over t in `range` by RK4 on X' + Gamma(c', X) = 0.
pub fn parallel_transport(g: &MetricField, v0: &[f64], curve: &Curve, range: (f64, f64), ctl: StepControl) -> Result<History> {
    let n = g.dim();
    if v0.len() != n || curve.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v0.len() });
    }
    let length = range.1 - range.0;
    let (steps, h) = steps_for(length, ctl.step)?;
    let coarse = transport_run(g, v0, curve, range.0, h, steps)?;
    let fine = transport_run(g, v0, curve, range.0, 0.5 * h, 2 * steps)?;
    let end = curve.point(range.1);
    let na = g.inner(&end, coarse.last().expect("states"), coarse.last().expect("states"))?;
    let nb = g.inner(&end, fine.last().expect("states"), fine.last().expect("states"))?;
    let n0 = g.inner(&curve.point(range.0), v0, v0)?.abs().max(1e-300);
    let drift = (na - nb).abs() / n0;
    let guard = ctl.guard(h, length);
    if drift > guard {
        return Err(Error::StepTooLarge { drift, guard });
    }
    let s: Vec<f64> = (0..=steps).map(|k| range.0 + k as f64 * h).collect();
    Ok(History {
        position: s.iter().map(|&t| curve.point(t)).collect(),
        s,
        vector: coarse,
    })
}

/// g-orthonormal frame at p built from the first two coordinate directions.
fn orthonormal_frame(g: &MetricField, p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.dim();
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let l1 = g.norm(p, &e1)?;
    e1[0] /= l1;
    let mut e2 = vec![0.0; n];
    e2[1] = 1.0;
    let proj = g.inner(p, &e2, &e1)?;
    for i in 0..n {
        e2[i] -= proj * e1[i];
    }
    let l2 = g.norm(p, &e2)?;
    for c in e2.iter_mut() {
        *c /= l2;
    }
    Ok((e1, e2))
}

/// Signed rotation of a vector carried once around a closed loop of curves,
/// each traversed over t in [0, 1]. Positive means rotation from the first
/// coordinate direction toward the second.
pub fn holonomy_angle(g: &MetricField, lp: &[Curve], ctl: StepControl) -> Result<f64> {
    if g.dim() < 2 || lp.is_empty() {
        return Err(Error::InvalidParameter("holonomy needs a surface and a non-empty loop".into()));
    }
    let start = lp[0].point(0.0);
    let finish = lp[lp.len() - 1].point(1.0);
    let gap = start.iter().zip(&finish).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::InvalidParameter(format!("loop is not closed (gap {gap:e})")));
    }
    let (e1, e2) = orthonormal_frame(g, &start)?;
    let mut x = e1.clone();
    for c in lp {
        x = parallel_transport(g, &x, c, (0.0, 1.0), ctl)?.last_vector().to_vec();
    }
    let a = g.inner(&start, &x, &e1)?;
    let b = g.inner(&start, &x, &e2)?;
    Ok(b.atan2(a))
}

/// Orthonormal frame used to chart the unit sphere with a chosen pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereFrame {
    /// Rows are the new x, y, z axes in ambient coordinates.
    pub axes: [[f64; 3]; 3],
}

fn normalized(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 1e-12) {
        return Err(Error::InvalidParameter("zero direction".into()));
    }
    Ok(v.map(|c| c / n))
}

impl SphereFrame {
    pub fn standard() -> Self {
        SphereFrame {
            axes: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Chart pole along `pole`; theta = 0 toward the part of `reference` orthogonal to it.
    pub fn new(pole: [f64; 3], reference: [f64; 3]) -> Result<Self> {
        let z = normalized(pole)?;
        let dot = reference[0] * z[0] + reference[1] * z[1] + reference[2] * z[2];
        let x = normalized([0, 1, 2].map(|i| reference[i] - dot * z[i]))?;
        let y = [z[1] * x[2] - z[2] * x[1], z[2] * x[0] - z[0] * x[2], z[0] * x[1] - z[1] * x[0]];
        Ok(SphereFrame { axes: [x, y, z] })
    }

    /// (phi, theta) of an ambient unit vector.
    pub fn chart_point(&self, p: [f64; 3]) -> [f64; 2] {
        let y = self.axes.map(|a| a[0] * p[0] + a[1] * p[1] + a[2] * p[2]);
        [y[2].clamp(-1.0, 1.0).acos(), y[1].atan2(y[0])]
    }
}

/// Minor great-circle arc from `a` to `b` (unit vectors) over t in [0, 1], in
/// the chart of `frame`.
pub fn great_circle_arc(frame: &SphereFrame, a: [f64; 3], b: [f64; 3]) -> Result<Curve> {
    let (a, b) = (normalized(a)?, normalized(b)?);
    let cos = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    let omega = cos.acos();
    if !(omega > 1e-12 && omega < PI_MINUS) {
        return Err(Error::InvalidParameter("arc endpoints must be distinct and not antipodal".into()));
    }
    let frame = *frame;
    Ok(Curve::new(2, move |t| {
        let wa = ((-t + 1.0) * omega).sin() * (1.0 / omega.sin());
        let wb = (t * omega).sin() * (1.0 / omega.sin());
        let x: Vec<Jet> = (0..3).map(|i| wa * a[i] + wb * b[i]).collect();
        let y: Vec<Jet> = frame
            .axes
            .iter()
            .map(|r| x[0] * r[0] + x[1] * r[1] + x[2] * r[2])
            .collect();
        vec![y[2].acos(), y[1].atan2(&y[0])]
    }))
}

const PI_MINUS: f64 = std::f64::consts::PI - 1e-9;

/// Closed loop of great-circle arcs through the given vertices.
pub fn geodesic_polygon(frame: &SphereFrame, vertices: &[[f64; 3]]) -> Result<Vec<Curve>> {
    (0..vertices.len())
        .map(|i| great_circle_arc(frame, vertices[i], vertices[(i + 1) % vertices.len()]))
        .collect()
}

type TangentFn = dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync;

/// Vector field given by jet-valued components, so it can be differentiated.
#[derive(Clone)]
pub struct TangentField {
    dim: usize,
    f: Arc<TangentFn>,
}

impl fmt::Debug for TangentField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TangentField(dim = {})", self.dim)
    }
}

impl TangentField {
    pub fn new<F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static>(dim: usize, f: F) -> Self {
        TangentField { dim, f: Arc::new(f) }
    }

    pub fn constant(v: &[f64]) -> Self {
        let v = v.to_vec();
        TangentField::new(v.len(), move |_| v.iter().map(|&c| Jet::constant(c)).collect())
    }

    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        TangentField::constant(&v)
    }

    /// The field f v.
    pub fn scaled(&self, f: &ScalarField) -> Self {
        let (inner, f) = (self.clone(), f.clone());
        TangentField::new(self.dim, move |p| {
            let s = f.eval_jets(p).expect("scalar factor evaluation");
            inner.eval(p).into_iter().map(|c| c * s).collect()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &[Jet]) -> Vec<Jet> {
        (self.f)(p)
    }

    pub fn at(&self, p: &[f64]) -> Vec<f64> {
        let pj: Vec<Jet> = p.iter().map(|&v| Jet::constant(v)).collect();
        self.eval(&pj).iter().map(|j| j.value()).collect()
    }
}

fn nabla(gamma: &[Vec<Vec<Jet>>], dir: &[Jet], field: &[Jet]) -> Vec<Jet> {
    let n = field.len();
    (0..n)
        .map(|i| {
            let mut s = Jet::constant(0.0);
            for j in 0..n {
                let mut t = field[i].partial(j);
                for k in 0..n {
                    t += gamma[i][j][k] * field[k];
                }
                s += dir[j] * t;
            }
            s
        })
        .collect()
}

fn bracket_jets(x: &[Jet], y: &[Jet]) -> Vec<Jet> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut s = Jet::constant(0.0);
            for j in 0..n {
                s += x[j] * y[i].partial(j) - y[j] * x[i].partial(j);
            }
            s
        })
        .collect()
}

fn check_fields(g: &MetricField, fields: &[&TangentField]) -> Result<()> {
    for f in fields {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: f.dim(),
            });
        }
    }
    Ok(())
}

/// (nabla_X v)^i = X^j (d_j v^i + Gamma^i_{jk} v^k).
pub fn covariant_derivative(g: &MetricField, v: &TangentField, x: &TangentField, p: &[f64]) -> Result<Vec<f64>> {
    check_fields(g, &[v, x])?;
    let pj = Jet::variables(p, 1);
    let gamma = christoffel_jets(g, &pj)?;
    Ok(nabla(&gamma, &x.eval(&pj), &v.eval(&pj)).iter().map(|j| j.value()).collect())
}

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i.
pub fn lie_bracket(x: &TangentField, y: &TangentField, p: &[f64]) -> Vec<f64> {
    let pj = Jet::variables(p, 1);
    bracket_jets(&x.eval(&pj), &y.eval(&pj)).iter().map(|j| j.value()).collect()
}

/// Omega(X, Y) v = nabla_X nabla_Y v - nabla_Y nabla_X v - nabla_[X,Y] v.
pub fn curvature_commutator(g: &MetricField, x: &TangentField, y: &TangentField, v: &TangentField, p: &[f64]) -> Result<Vec<f64>> {
    check_fields(g, &[x, y, v])?;
    let pj = Jet::variables(p, 2);
    let gamma = christoffel_jets(g, &pj)?;
    let (xj, yj, vj) = (x.eval(&pj), y.eval(&pj), v.eval(&pj));
    let ny_v = nabla(&gamma, &yj, &vj);
    let nx_v = nabla(&gamma, &xj, &vj);
    let xy = nabla(&gamma, &xj, &ny_v);
    let yx = nabla(&gamma, &yj, &nx_v);
    let br = nabla(&gamma, &bracket_jets(&xj, &yj), &vj);
    Ok((0..g.dim()).map(|i| xy[i].value() - yx[i].value() - br[i].value()).collect())
}

/// <Omega(Y, X) X, Y> / (|X|^2 |Y|^2 - <X, Y>^2).
pub fn sectional_curvature(g: &MetricField, p: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
    let (xf, yf) = (TangentField::constant(x), TangentField::constant(y));
    let w = curvature_commutator(g, &yf, &xf, &xf, p)?;
    let gram = g.inner(p, x, x)? * g.inner(p, y, y)? - g.inner(p, x, y)?.powi(2);
    if gram.abs() < 1e-300 {
        return Err(Error::InvalidParameter("directions are parallel".into()));
    }
    Ok(g.inner(p, &w, y)? / gram)
}

/// Gaussian curvature of a 2D metric.
pub fn gaussian_curvature(g: &MetricField, p: &[f64]) -> Result<f64> {
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: g.dim() });
    }
    sectional_curvature(g, p, &[1.0, 0.0], &[0.0, 1.0])
}

/// Scalar deviation y(s) along a geodesic: y'' + K y = 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiHistory {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub ydot: Vec<f64>,
    pub curvature: Vec<f64>,
}

/// Integrates the geodesic from `ics` together with y'' = -K(s) y.
pub fn jacobi_deviation(g: &MetricField, ics: &GeodesicState, y0: f64, y0dot: f64, s_end: f64, step: f64) -> Result<JacobiHistory> {
    let n = g.dim();
    if n != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: n });
    }
    let (steps, h) = steps_for(s_end - ics.s, step)?;
    let mut y = ics.position.clone();
    y.extend_from_slice(&ics.velocity);
    y.extend([y0, y0dot]);
    let states = rk4_path(
        |_, st| {
            let gamma = christoffel(g, &st[..2])?;
            let k = gaussian_curvature(g, &st[..2])?;
            let acc = contract(&gamma, &st[2..4], &st[2..4]);
            Ok(vec![st[2], st[3], -acc[0], -acc[1], st[5], -k * st[4]])
        },
        ics.s,
        &y,
        h,
        steps,
    )?;
    let curvature = states.iter().map(|st| gaussian_curvature(g, &st[..2])).collect::<Result<_>>()?;
    Ok(JacobiHistory {
        s: (0..=steps).map(|k| ics.s + k as f64 * h).collect(),
        y: states.iter().map(|st| st[4]).collect(),
        ydot: states.iter().map(|st| st[5]).collect(),
        curvature,
    })
}

/// diag(2 phi - 1, 1, 1, 1) on (t, x, y, z).
pub fn weak_field_metric(phi: &ScalarField) -> Result<MetricField> {
    if phi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: phi.dim() });
    }
    let phi = phi.clone();
    MetricField::new(Chart::minkowski(), move |p| {
        let f = phi.eval_jets(p)?;
        let z = Jet::constant(0.0);
        let one = Jet::constant(1.0);
        Ok(vec![
            vec![f * 2.0 - 1.0, z, z, z],
            vec![z, one, z, z],
            vec![z, z, one, z],
            vec![z, z, z, one],
        ])
    })
}

/// Coordinate light speed sqrt(-g_00).
pub fn effective_light_speed(g: &MetricField, p: &[f64]) -> Result<f64> {
    let g00 = g.at(p)?[0][0];
    if !(g00 < 0.0) {
        return Err(Error::InvalidParameter("g_00 must be negative".into()));
    }
    Ok((-g00).sqrt())
}

/// d^2 x^i / dt^2 of the geodesic through (position, four-velocity), from the
/// geodesic equation and the chain rule.
pub fn coordinate_acceleration(g: &MetricField, position: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let gamma = christoffel(g, position)?;
    let a = contract(&gamma, u, u);
    if u[0] == 0.0 {
        return Err(Error::InvalidParameter("four-velocity has no time component".into()));
    }
    let (u0, a0) = (u[0], -a[0]);
    Ok((1..g.dim()).map(|i| (-a[i] - u[i] / u0 * a0) / (u0 * u0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn christoffel_examples() {
        let e = MetricField::euclidean(3).unwrap();
        assert!(christoffel(&e, &[0.3, 1.0, -2.0]).unwrap().iter().flatten().flatten().all(|&v| v == 0.0));
        let s = MetricField::sphere(1.0).unwrap();
        let p = [0.7, 0.2];
        let gm = christoffel(&s, &p).unwrap();
        assert!((gm[0][1][1] + p[0].sin() * p[0].cos()).abs() < 1e-14);
        assert!((gm[1][0][1] - 1.0 / p[0].tan()).abs() < 1e-14);
        assert!((gm[1][1][0] - gm[1][0][1]).abs() == 0.0);
        let pol = MetricField::polar().unwrap();
        let gm = christoffel(&pol, &[2.0, 0.4]).unwrap();
        assert!((gm[0][1][1] + 2.0).abs() < 1e-14 && (gm[1][0][1] - 0.5).abs() < 1e-14);
        assert!(matches!(christoffel(&s, &[0.0, 0.0]), Err(Error::SingularPoint)));
    }

    #[test]
    fn equator_is_a_geodesic() {
        let s = MetricField::sphere(1.0).unwrap();
        let ics = GeodesicState::new(&[FRAC_PI_2, 0.0], &[0.0, 1.0]);
        let h = integrate_geodesic(&s, &ics, 2.0 * PI, StepControl::new(1e-3)).unwrap();
        assert!(h.position.iter().all(|p| (p[0] - FRAC_PI_2).abs() < 1e-8));
        assert!((h.last_position()[1] - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn equator_loop_transport_returns() {
        let s = MetricField::sphere(1.0).unwrap();
        let c = Curve::new(2, |t| vec![Jet::constant(FRAC_PI_2), t * (2.0 * PI)]);
        let h = parallel_transport(&s, &[1.0, 0.0], &c, (0.0, 1.0), StepControl::new(1e-3)).unwrap();
        let v = h.last_vector();
        assert!((v[0] - 1.0).abs() < 1e-8 && v[1].abs() < 1e-8);
    }

    #[test]
    fn sphere_curvature_and_flatness() {
        let s = MetricField::sphere(1.0).unwrap();
        assert!((gaussian_curvature(&s, &[1.1, 0.3]).unwrap() - 1.0).abs() < 1e-10);
        let s2 = MetricField::sphere(2.0).unwrap();
        assert!((gaussian_curvature(&s2, &[0.6, 0.3]).unwrap() - 0.25).abs() < 1e-10);
        let flat = MetricField::constant(Chart::euclidean(2), vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(gaussian_curvature(&flat, &[0.1, 0.2]).unwrap(), 0.0);
        assert!(gaussian_curvature(&MetricField::polar().unwrap(), &[1.5, 0.2]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn jacobi_on_sphere() {
        let s = MetricField::sphere(1.0).unwrap();
        let ics = GeodesicState::new(&[FRAC_PI_2, 0.0], &[0.0, 1.0]);
        let j = jacobi_deviation(&s, &ics, 0.0, 0.3, 3.0, 1e-3).unwrap();
        for (s, y) in j.s.iter().zip(&j.y) {
            assert!((y - 0.3 * s.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn weak_field_speed() {
        let phi = ScalarField::constant(4, 0.01);
        let g = weak_field_metric(&phi).unwrap();
        let c = effective_light_speed(&g, &[0.0; 4]).unwrap();
        assert!((c - 0.98f64.sqrt()).abs() < 1e-15);
        let mink = weak_field_metric(&ScalarField::zero(4)).unwrap();
        assert_eq!(mink.at(&[0.0, 1.0, 2.0, 3.0]).unwrap()[0][0], -1.0);
    }

    #[test]
    fn history_csv() {
        let h = History {
            s: vec![0.0],
            position: vec![vec![1.0, 2.0]],
            vector: vec![vec![3.0, 4.0]],
        };
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s,x0,x1,v0,v1\n0,1,2,3,4\n");
    }
}
