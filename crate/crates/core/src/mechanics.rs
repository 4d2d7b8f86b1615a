//! Lagrangians, action, Euler-Lagrange residuals, Noether charges and the
//! charged-particle integrator.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chartcalc::{Jet, ScalarField, MAX_VARS};
use crate::error::{Error, Result};
use crate::maxwell::{check_velocity, EMField};
use crate::numerics::{d1_five_point, rk4_path, simpson_samples};

type LagFn = dyn Fn(&[Jet], &[Jet], f64) -> Jet + Send + Sync;

/// L(q, qdot, t). The closure receives jets over the 2n variables (q, qdot).
#[derive(Clone)]
pub struct LagrangianSpec {
    dim: usize,
    f: Arc<LagFn>,
}

impl fmt::Debug for LagrangianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LagrangianSpec(dim = {})", self.dim)
    }
}

impl LagrangianSpec {
    pub fn new<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[Jet], &[Jet], f64) -> Jet + Send + Sync + 'static,
    {
        if dim == 0 || 2 * dim > MAX_VARS {
            return Err(Error::TooManyVariables(2 * dim));
        }
        Ok(LagrangianSpec { dim, f: Arc::new(f) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Jet of L over (q, qdot) at the given state.
    pub fn jet(&self, q: &[f64], qd: &[f64], t: f64, order: u8) -> Result<Jet> {
        if q.len() != self.dim || qd.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: q.len().min(qd.len()),
            });
        }
        let mut vals = q.to_vec();
        vals.extend_from_slice(qd);
        let vars = Jet::variables(&vals, order);
        let out = (self.f)(&vars[..self.dim], &vars[self.dim..], t);
        if !out.value().is_finite() {
            return Err(Error::NonFinite("Lagrangian value".into()));
        }
        Ok(out.widen(2 * self.dim))
    }

    pub fn value(&self, q: &[f64], qd: &[f64], t: f64) -> Result<f64> {
        Ok(self.jet(q, qd, t, 0)?.value())
    }

    /// Canonical momenta dL/dqdot.
    pub fn momenta(&self, q: &[f64], qd: &[f64], t: f64) -> Result<Vec<f64>> {
        let j = self.jet(q, qd, t, 1)?;
        Ok((0..self.dim).map(|i| j.d(self.dim + i)).collect())
    }

    /// Generalized forces dL/dq.
    pub fn forces(&self, q: &[f64], qd: &[f64], t: f64) -> Result<Vec<f64>> {
        let j = self.jet(q, qd, t, 1)?;
        Ok((0..self.dim).map(|i| j.d(i)).collect())
    }

    /// Energy function sum p qdot - L.
    pub fn energy(&self, q: &[f64], qd: &[f64], t: f64) -> Result<f64> {
        let j = self.jet(q, qd, t, 1)?;
        let mut h = -j.value();
        for i in 0..self.dim {
            h += j.d(self.dim + i) * qd[i];
        }
        Ok(h)
    }

    /// Accelerations from the Euler-Lagrange equations, solving
    /// M qddot = dL/dq - C qdot - d/dt(dL/dqdot)|explicit.
    pub fn acceleration(&self, q: &[f64], qd: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.dim;
        let j = self.jet(q, qd, t, 2)?;
        let dt = 1e-5 * t.abs().max(1.0);
        let p_plus = self.momenta(q, qd, t + dt)?;
        let p_minus = self.momenta(q, qd, t - dt)?;
        let m = DMatrix::from_fn(n, n, |a, b| j.dd(n + a, n + b));
        let rhs = DVector::from_fn(n, |a, _| {
            let mut r = j.d(a) - (p_plus[a] - p_minus[a]) / (2.0 * dt);
            for b in 0..n {
                r -= j.dd(n + a, b) * qd[b];
            }
            r
        });
        let sol = m.lu().solve(&rhs).ok_or(Error::SingularMatrix)?;
        Ok(sol.iter().copied().collect())
    }
}

/// Uniformly sampled path with stored velocities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub qdot: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, q: Vec<Vec<f64>>, qdot: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || q.len() != times.len() || qdot.len() != times.len() {
            return Err(Error::InvalidParameter("trajectory needs matching samples (>= 2)".into()));
        }
        let h = times[1] - times[0];
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("times must increase".into()));
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(w[1].abs()) {
                return Err(Error::InvalidParameter("times must be uniformly spaced".into()));
            }
        }
        let dim = q[0].len();
        if q.iter().chain(qdot.iter()).any(|s| s.len() != dim) {
            return Err(Error::InvalidParameter("inconsistent state dimension".into()));
        }
        Ok(Trajectory { times, q, qdot })
    }

    /// Velocities by natural cubic spline differentiation of positions.
    pub fn from_positions(times: Vec<f64>, q: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 3 || q.len() != times.len() {
            return Err(Error::InvalidParameter("need at least 3 samples".into()));
        }
        let dim = q[0].len();
        let h = times[1] - times[0];
        let mut qdot = vec![vec![0.0; dim]; times.len()];
        for k in 0..dim {
            let y: Vec<f64> = q.iter().map(|s| s[k]).collect();
            for (i, v) in spline_slopes(&y, h).into_iter().enumerate() {
                qdot[i][k] = v;
            }
        }
        Trajectory::new(times, q, qdot)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn dim(&self) -> usize {
        self.q[0].len()
    }

    pub fn index_of(&self, t: f64) -> Result<usize> {
        let h = self.step();
        let i = ((t - self.times[0]) / h).round();
        if i < 0.0 || i as usize >= self.len() || (self.times[i as usize] - t).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InvalidParameter(format!("t = {t} is not a sample time")));
        }
        Ok(i as usize)
    }

    /// CSV with columns t, q0.., qdot0..
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n = self.dim();
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("q{i}")));
        header.extend((0..n).map(|i| format!("qdot{i}")));
        out.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.times[i].to_string()];
            row.extend(self.q[i].iter().map(|v| v.to_string()));
            row.extend(self.qdot[i].iter().map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn spline_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len() - 1;
    // second derivatives with natural ends, Thomas algorithm
    let mut m = vec![0.0; n + 1];
    if n >= 2 {
        let size = n - 1;
        let mut c = vec![0.0; size];
        let mut d = vec![0.0; size];
        for i in 0..size {
            let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
            let (a, b) = (1.0, 4.0);
            let denom = if i == 0 { b } else { b - a * c[i - 1] };
            c[i] = 1.0 / denom;
            d[i] = if i == 0 { rhs / denom } else { (rhs - a * d[i - 1]) / denom };
        }
        for i in (0..size).rev() {
            m[i + 1] = if i + 1 == size { d[i] } else { d[i] - c[i] * m[i + 2] };
        }
    }
    let mut s = Vec::with_capacity(n + 1);
    for i in 0..n {
        s.push((y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0);
    }
    s.push((y[n] - y[n - 1]) / h + h * (m[n - 1] + 2.0 * m[n]) / 6.0);
    s
}

/// Simpson integral of L along the samples.
pub fn action(l: &LagrangianSpec, path: &Trajectory) -> Result<f64> {
    let vals: Vec<f64> = (0..path.len())
        .map(|i| l.value(&path.q[i], &path.qdot[i], path.times[i]))
        .collect::<Result<_>>()?;
    Ok(simpson_samples(&vals, path.step()))
}

/// d/dt(dL/dqdot) - dL/dq at sample `i` (5-point stencil; needs two samples each side).
pub fn el_residual_at(l: &LagrangianSpec, path: &Trajectory, i: usize) -> Result<Vec<f64>> {
    if i < 2 || i + 2 >= path.len() {
        return Err(Error::InvalidParameter("residual needs two samples on each side".into()));
    }
    let h = path.step();
    let moms: Vec<Vec<f64>> = (i - 2..=i + 2)
        .map(|k| l.momenta(&path.q[k], &path.qdot[k], path.times[k]))
        .collect::<Result<_>>()?;
    let forces = l.forces(&path.q[i], &path.qdot[i], path.times[i])?;
    Ok((0..l.dim())
        .map(|a| {
            let p: Vec<f64> = moms.iter().map(|m| m[a]).collect();
            d1_five_point(&p, 2, h).expect("five samples") - forces[a]
        })
        .collect())
}

pub fn el_residual(l: &LagrangianSpec, path: &Trajectory, t: f64) -> Result<Vec<f64>> {
    el_residual_at(l, path, path.index_of(t)?)
}

/// Largest residual component over all interior samples.
pub fn el_residual_sup(l: &LagrangianSpec, path: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 2..path.len().saturating_sub(2) {
        for r in el_residual_at(l, path, i)? {
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

type GenFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A one-parameter symmetry: a generator field q'(q), or time translation.
#[derive(Clone)]
pub enum Symmetry {
    Generator(Arc<GenFn>),
    TimeTranslation,
}

impl fmt::Debug for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symmetry::Generator(_) => write!(f, "Symmetry::Generator"),
            Symmetry::TimeTranslation => write!(f, "Symmetry::TimeTranslation"),
        }
    }
}

impl Symmetry {
    pub fn generator<F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static>(f: F) -> Self {
        Symmetry::Generator(Arc::new(f))
    }

    /// Rotation in the (q0, q1) plane.
    pub fn rotation() -> Self {
        Symmetry::generator(|q| {
            let mut g = vec![0.0; q.len()];
            g[0] = -q[1];
            g[1] = q[0];
            g
        })
    }

    pub fn translation(axis: usize) -> Self {
        Symmetry::generator(move |q| {
            let mut g = vec![0.0; q.len()];
            g[axis] = 1.0;
            g
        })
    }
}

/// The conserved quantity associated with `sym` at sample `i`.
pub fn noether_charge(l: &LagrangianSpec, sym: &Symmetry, path: &Trajectory, i: usize) -> Result<f64> {
    let (q, qd, t) = (&path.q[i], &path.qdot[i], path.times[i]);
    match sym {
        Symmetry::TimeTranslation => l.energy(q, qd, t),
        Symmetry::Generator(g) => {
            let p = l.momenta(q, qd, t)?;
            let dir = g(q);
            Ok(p.iter().zip(&dir).map(|(a, b)| a * b).sum())
        }
    }
}

/// RK4 on the Euler-Lagrange equations with a fixed step.
pub fn integrate_lagrangian(
    l: &LagrangianSpec,
    q0: &[f64],
    qd0: &[f64],
    t0: f64,
    h: f64,
    steps: usize,
) -> Result<Trajectory> {
    let n = l.dim();
    let mut y0 = q0.to_vec();
    y0.extend_from_slice(qd0);
    let states = rk4_path(
        |t, y| {
            let mut dy = y[n..].to_vec();
            dy.extend(l.acceleration(&y[..n], &y[n..], t)?);
            Ok(dy)
        },
        t0,
        &y0,
        h,
        steps,
    )?;
    let times = (0..=steps).map(|k| t0 + k as f64 * h).collect();
    let q = states.iter().map(|s| s[..n].to_vec()).collect();
    let qdot = states.iter().map(|s| s[n..].to_vec()).collect();
    Trajectory::new(times, q, qdot)
}

/// Result of an integration whose step was chosen by halving until the
/// energy drift met the tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct GuardedRun {
    pub trajectory: Trajectory,
    pub step: f64,
    pub halvings: usize,
    pub energy_drift: f64,
}

/// Integrates an autonomous Lagrangian over [t0, t1], halving the step from
/// `h0` until the relative energy drift is below `tol`.
pub fn integrate_with_energy_guard(
    l: &LagrangianSpec,
    q0: &[f64],
    qd0: &[f64],
    t0: f64,
    t1: f64,
    h0: f64,
    tol: f64,
    max_halvings: usize,
) -> Result<GuardedRun> {
    let e0 = l.energy(q0, qd0, t0)?;
    let scale = e0.abs().max(f64::MIN_POSITIVE);
    let mut h = h0;
    let mut last = f64::INFINITY;
    for halvings in 0..=max_halvings {
        let steps = ((t1 - t0) / h).round().max(1.0) as usize;
        let hh = (t1 - t0) / steps as f64;
        let traj = integrate_lagrangian(l, q0, qd0, t0, hh, steps)?;
        let mut drift: f64 = 0.0;
        for i in 0..traj.len() {
            let e = l.energy(&traj.q[i], &traj.qdot[i], traj.times[i])?;
            drift = drift.max((e - e0).abs() / scale);
        }
        if drift < tol {
            return Ok(GuardedRun {
                trajectory: traj,
                step: hh,
                halvings,
                energy_drift: drift,
            });
        }
        last = drift;
        h *= 0.5;
    }
    Err(Error::StepTooLarge { drift: last, guard: tol })
}

/// L = m|v|^2/2 - e phi + (e/c) v.A with E = -grad phi - (1/c) dA/dt and B = curl A.
/// `phi` and `a` are functions of (t, x, y, z).
pub fn em_lagrangian(phi: &ScalarField, a: &[ScalarField; 3], e: f64, m: f64, c: f64) -> Result<LagrangianSpec> {
    let phi = phi.clone();
    let a = a.clone();
    for f in std::iter::once(&phi).chain(a.iter()) {
        if f.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: f.dim(),
            });
        }
    }
    LagrangianSpec::new(3, move |q, v, t| {
        let x = [Jet::constant(t), q[0], q[1], q[2]];
        let kinetic = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * (0.5 * m);
        // potentials are smooth by construction; a failure here is a programming error
        let ph = phi.eval_jets(&x).expect("scalar potential evaluation");
        let mut coupling = Jet::constant(0.0);
        for i in 0..3 {
            coupling += v[i] * a[i].eval_jets(&x).expect("vector potential evaluation");
        }
        kinetic - ph * e + coupling * (e / c)
    })
}

/// Settings for the charged-particle integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmIntegration {
    pub step: f64,
    /// Largest allowed gap between the h and h/2 runs, relative to the state scale.
    pub guard: f64,
}

impl Default for EmIntegration {
    fn default() -> Self {
        EmIntegration { step: 1e-3, guard: 1e-6 }
    }
}

fn lorentz_rk4(em: &EMField, q: f64, m: f64, c: f64, x0: [f64; 3], v0: [f64; 3], t0: f64, h: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    let mut y0 = x0.to_vec();
    y0.extend_from_slice(&v0);
    rk4_path(
        |t, y| {
            let p = [t, y[0], y[1], y[2]];
            let e = em.e_at(&p)?;
            let b = em.b_at(&p)?;
            let v = [y[3], y[4], y[5]];
            let vxb = [v[1] * b[2] - v[2] * b[1], v[2] * b[0] - v[0] * b[2], v[0] * b[1] - v[1] * b[0]];
            let k = q / m;
            Ok(vec![
                v[0],
                v[1],
                v[2],
                k * (e[0] + vxb[0] / c),
                k * (e[1] + vxb[1] / c),
                k * (e[2] + vxb[2] / c),
            ])
        },
        t0,
        &y0,
        h,
        steps,
    )
}

/// RK4 integration of m dv/dt = q (E + v x B / c). The run is repeated at half
/// step and rejected if the two disagree beyond the guard.
#[allow(clippy::too_many_arguments)]
pub fn integrate_em_particle(
    em: &EMField,
    q: f64,
    m: f64,
    c: f64,
    x0: [f64; 3],
    v0: [f64; 3],
    tspan: (f64, f64),
    cfg: EmIntegration,
) -> Result<Trajectory> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter("mass must be positive".into()));
    }
    check_velocity(&v0, c)?;
    let (t0, t1) = tspan;
    let steps = ((t1 - t0) / cfg.step).round().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let coarse = lorentz_rk4(em, q, m, c, x0, v0, t0, h, steps)?;
    let fine = lorentz_rk4(em, q, m, c, x0, v0, t0, 0.5 * h, 2 * steps)?;
    let (a, b) = (coarse.last().expect("states"), fine.last().expect("states"));
    let scale = a.iter().fold(1e-300f64, |s, v| s.max(v.abs()));
    let drift = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
    if drift > cfg.guard {
        return Err(Error::StepTooLarge { drift, guard: cfg.guard });
    }
    let times = (0..=steps).map(|k| t0 + k as f64 * h).collect();
    let qs = coarse.iter().map(|s| s[..3].to_vec()).collect();
    let vs = coarse.iter().map(|s| s[3..].to_vec()).collect();
    Trajectory::new(times, qs, vs)
}

/// Algebraic least-squares circle through planar points: (centre, radius).
pub fn fit_circle(points: &[[f64; 2]]) -> Result<([f64; 2], f64)> {
    let mut ata = DMatrix::<f64>::zeros(3, 3);
    let mut atb = DVector::<f64>::zeros(3);
    for p in points {
        let row = [p[0], p[1], 1.0];
        let rhs = -(p[0] * p[0] + p[1] * p[1]);
        for i in 0..3 {
            atb[i] += row[i] * rhs;
            for j in 0..3 {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    }
    let s = ata.lu().solve(&atb).ok_or(Error::SingularMatrix)?;
    let centre = [-0.5 * s[0], -0.5 * s[1]];
    let r2 = centre[0] * centre[0] + centre[1] * centre[1] - s[2];
    Ok((centre, r2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(m: f64) -> LagrangianSpec {
        LagrangianSpec::new(1, move |_, v, _| v[0] * v[0] * (0.5 * m)).unwrap()
    }

    fn sampled(n: usize, h: f64, f: impl Fn(f64) -> (f64, f64)) -> Trajectory {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let q = times.iter().map(|&t| vec![f(t).0]).collect();
        let qd = times.iter().map(|&t| vec![f(t).1]).collect();
        Trajectory::new(times, q, qd).unwrap()
    }

    #[test]
    fn action_of_straight_line() {
        let path = sampled(101, 0.01, |t| (2.0 * t, 2.0));
        let s = action(&free(3.0), &path).unwrap();
        assert!((s - 6.0).abs() < 1e-12);
        let zero = sampled(11, 0.1, |_| (0.0, 0.0));
        assert_eq!(action(&free(1.0), &zero).unwrap(), 0.0);
    }

    #[test]
    fn el_residuals() {
        let path = sampled(101, 0.01, |t| (1.0 + 0.5 * t, 0.5));
        assert!(el_residual_sup(&free(2.0), &path).unwrap() < 1e-12);
        // a sine path is wrong for the free particle: residual m w^2 A sin
        let w = 3.0;
        let path = sampled(201, 0.005, |t| ((w * t).sin(), w * (w * t).cos()));
        let r = el_residual(&free(2.0), &path, 0.5).unwrap()[0];
        assert!((r + 2.0 * w * w * (w * 0.5f64).sin()).abs() < 1e-6);
        assert!(el_residual_at(&free(1.0), &path, 1).is_err());
    }

    #[test]
    fn oscillator_solution_satisfies_el() {
        let (m, k) = (1.5, 4.0);
        let l = LagrangianSpec::new(1, move |q, v, _| v[0] * v[0] * (0.5 * m) - q[0] * q[0] * (0.5 * k)).unwrap();
        let w = (k / m).sqrt();
        let path = sampled(401, 0.005, |t| ((w * t).cos(), -w * (w * t).sin()));
        assert!(el_residual_sup(&l, &path).unwrap() < 1e-6);
        let e = noether_charge(&l, &Symmetry::TimeTranslation, &path, 100).unwrap();
        assert!((e - 0.5 * k).abs() < 1e-12);
    }

    #[test]
    fn spline_fallback_slopes() {
        let times: Vec<f64> = (0..201).map(|i| i as f64 * 0.01).collect();
        let q = times.iter().map(|t| vec![t.sin()]).collect();
        let tr = Trajectory::from_positions(times, q).unwrap();
        assert!((tr.qdot[100][0] - 1f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn translation_charge_is_momentum() {
        let l = free(2.5);
        let path = sampled(11, 0.1, |t| (t * 0.4, 0.4));
        let p = noether_charge(&l, &Symmetry::translation(0), &path, 5).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_electric_field_accelerates() {
        let em = EMField::uniform([0.3, 0.0, 0.0], [0.0; 3]);
        let tr = integrate_em_particle(&em, 2.0, 1.5, 1.0, [0.0; 3], [0.0; 3], (0.0, 1.0), EmIntegration::default()).unwrap();
        let a = 2.0 * 0.3 / 1.5;
        let last = tr.len() - 1;
        assert!((tr.q[last][0] - 0.5 * a).abs() < 1e-12);
        assert!((tr.qdot[last][0] - a).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let path = sampled(3, 0.5, |t| (t, 1.0));
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,q0,qdot0\n0,0,1\n"));
    }

    #[test]
    fn circle_fit() {
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let a = i as f64 * 0.3;
                [1.0 + 2.0 * a.cos(), -0.5 + 2.0 * a.sin()]
            })
            .collect();
        let (c, r) = fit_circle(&pts).unwrap();
        assert!((r - 2.0).abs() < 1e-12 && (c[0] - 1.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12);
    }
}
