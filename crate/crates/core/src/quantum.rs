//! Gauged Schrödinger mechanics on a 1D grid.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::chartcalc::{Jet, ScalarField, UnitSystem};
use crate::error::{Error, Result};
use crate::numerics::gauss5_nodes;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest grid accepted by the dense exact propagator.
pub const DENSE_CAP: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Dirichlet walls just outside the first and last node.
    Box,
}

/// N nodes x_j = start + j dx.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    pub n: usize,
    pub dx: f64,
    pub start: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(n: usize, dx: f64, start: f64, boundary: Boundary) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!("grid needs N >= 8, got {n}")));
        }
        if !(dx > 0.0) || !start.is_finite() {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        Ok(Grid1D { n, dx, start, boundary })
    }

    /// Periodic grid covering [a, b) with N nodes.
    pub fn periodic(a: f64, b: f64, n: usize) -> Result<Self> {
        Grid1D::new(n, (b - a) / n as f64, a, Boundary::Periodic)
    }

    /// Box grid on the open interval (a, b): N interior nodes, walls at a and b.
    pub fn walled(a: f64, b: f64, n: usize) -> Result<Self> {
        let dx = (b - a) / (n + 1) as f64;
        Grid1D::new(n, dx, a + dx, Boundary::Box)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.start + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn extent(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.n as f64 * self.dx,
            Boundary::Box => (self.n + 1) as f64 * self.dx,
        }
    }

    fn neighbour(&self, j: usize, offset: isize) -> Option<usize> {
        let n = self.n as isize;
        let k = j as isize + offset;
        match self.boundary {
            Boundary::Periodic => Some(k.rem_euclid(n) as usize),
            Boundary::Box => (0..n).contains(&k).then_some(k as usize),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub grid: Grid1D,
    pub samples: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::DimensionMismatch {
                expected: grid.n,
                got: samples.len(),
            });
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("wavefunction sample".into()));
        }
        Ok(WaveFunction { grid, samples })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Grid1D, f: F) -> Result<Self> {
        WaveFunction::new(grid, grid.points().into_iter().map(f).collect())
    }

    /// Normalized packet exp(-(x - x0)^2 / (4 sigma^2) + i k0 x); sigma is the
    /// standard deviation of the density.
    pub fn gaussian(grid: Grid1D, x0: f64, sigma: f64, k0: f64) -> Result<Self> {
        let psi = WaveFunction::from_fn(grid, |x| {
            let d = x - x0;
            Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
        })?;
        psi.normalized()
    }

    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dx
    }

    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidParameter("cannot normalize a zero wavefunction".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        WaveFunction {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Grid L2 distance.
    pub fn distance(&self, other: &WaveFunction) -> f64 {
        (self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * self.grid.dx).sqrt()
    }

    fn vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.samples)
    }

    fn with_vector(&self, v: DVector<Complex64>) -> Self {
        WaveFunction {
            grid: self.grid,
            samples: v.iter().copied().collect(),
        }
    }

    /// Columns x, re, im, prob.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "re", "im", "prob"])?;
        for (j, z) in self.samples.iter().enumerate() {
            out.write_record([
                self.grid.x(j).to_string(),
                z.re.to_string(),
                z.im.to_string(),
                z.norm_sqr().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Dense complex N x N operator on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridOperator {
    pub grid: Grid1D,
    pub matrix: DMatrix<Complex64>,
}

impl GridOperator {
    pub fn new(grid: Grid1D, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != grid.n || matrix.ncols() != grid.n {
            return Err(Error::DimensionMismatch {
                expected: grid.n,
                got: matrix.nrows(),
            });
        }
        Ok(GridOperator { grid, matrix })
    }

    pub fn identity(grid: Grid1D) -> Self {
        GridOperator {
            grid,
            matrix: DMatrix::identity(grid.n, grid.n),
        }
    }

    pub fn diagonal(grid: Grid1D, d: &[f64]) -> Result<Self> {
        if d.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, got: d.len() });
        }
        let v = DVector::from_iterator(grid.n, d.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok(GridOperator {
            grid,
            matrix: DMatrix::from_diagonal(&v),
        })
    }

    pub fn apply(&self, psi: &WaveFunction) -> WaveFunction {
        psi.with_vector(&self.matrix * psi.vector())
    }

    pub fn compose(&self, other: &GridOperator) -> GridOperator {
        GridOperator {
            grid: self.grid,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn add(&self, other: &GridOperator) -> GridOperator {
        GridOperator {
            grid: self.grid,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, c: Complex64) -> GridOperator {
        GridOperator {
            grid: self.grid,
            matrix: &self.matrix * c,
        }
    }

    /// H + k Id.
    pub fn shifted(&self, k: f64) -> GridOperator {
        self.add(&GridOperator::identity(self.grid).scale(Complex64::new(k, 0.0)))
    }

    pub fn adjoint(&self) -> GridOperator {
        GridOperator {
            grid: self.grid,
            matrix: self.matrix.adjoint(),
        }
    }

    /// max |A - A^dagger| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// max |A + A^dagger| entry.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (&self.matrix + self.matrix.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

pub fn commutator(a: &GridOperator, b: &GridOperator) -> GridOperator {
    GridOperator {
        grid: a.grid,
        matrix: &a.matrix * &b.matrix - &b.matrix * &a.matrix,
    }
}

pub fn position_operator(grid: Grid1D) -> GridOperator {
    GridOperator::diagonal(grid, &grid.points()).expect("grid-sized diagonal")
}

/// P = -i hbar d/dx by central differences.
pub fn momentum_operator(grid: Grid1D, hbar: f64) -> GridOperator {
    let mut m = DMatrix::zeros(grid.n, grid.n);
    let c = -I * (hbar / (2.0 * grid.dx));
    for j in 0..grid.n {
        if let Some(k) = grid.neighbour(j, 1) {
            m[(j, k)] += c;
        }
        if let Some(k) = grid.neighbour(j, -1) {
            m[(j, k)] -= c;
        }
    }
    GridOperator { grid, matrix: m }
}

/// ([X, P] psi)_j = i hbar (psi_{j+1} + psi_{j-1}) / 2, evaluated through the operators.
pub fn commutator_xp(grid: Grid1D, hbar: f64, psi: &WaveFunction) -> Vec<Complex64> {
    let c = commutator(&position_operator(grid), &momentum_operator(grid, hbar));
    c.apply(psi).samples
}

/// H = (P - (e/c) A)^2 / 2m + e phi + V with fields of x.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    pub mass: f64,
    pub charge: f64,
    pub units: UnitSystem,
    pub potential: Option<ScalarField>,
    pub vector_potential: Option<ScalarField>,
    pub scalar_potential: Option<ScalarField>,
}

impl HamiltonianSpec {
    pub fn free(mass: f64, units: UnitSystem) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        Ok(HamiltonianSpec {
            mass,
            charge: units.e,
            units,
            potential: None,
            vector_potential: None,
            scalar_potential: None,
        })
    }

    pub fn with_potential(mut self, v: ScalarField) -> Self {
        self.potential = Some(v);
        self
    }

    pub fn with_vector_potential(mut self, a: ScalarField) -> Self {
        self.vector_potential = Some(a);
        self
    }

    pub fn with_scalar_potential(mut self, phi: ScalarField) -> Self {
        self.scalar_potential = Some(phi);
        self
    }

    /// e / (hbar c).
    pub fn coupling(&self) -> f64 {
        self.charge / (self.units.hbar * self.units.c)
    }

    /// The same system with A replaced by A + dLambda/dx.
    pub fn gauge_shifted(&self, lambda: &ScalarField) -> Self {
        let grad = lambda.partial(0);
        let mut out = self.clone();
        out.vector_potential = Some(match &self.vector_potential {
            Some(a) => a + &grad,
            None => grad,
        });
        out
    }

    /// e phi + V at x.
    fn onsite(&self, x: f64) -> Result<f64> {
        let mut v = 0.0;
        if let Some(p) = &self.potential {
            v += p.value(&[x])?;
        }
        if let Some(p) = &self.scalar_potential {
            v += self.charge * p.value(&[x])?;
        }
        Ok(v)
    }

    /// (e / hbar c) times the integral of A from x to x + dx.
    fn link_phase(&self, x: f64, dx: f64) -> Result<f64> {
        let Some(a) = &self.vector_potential else {
            return Ok(0.0);
        };
        let mut s = 0.0;
        for (t, w) in gauss5_nodes(x, x + dx, 2) {
            s += w * a.value(&[t])?;
        }
        Ok(self.coupling() * s)
    }
}

/// Grid Hamiltonian with the vector potential entering through link phases
/// U_{j,j+1} = exp(i (e/hbar c) integral of A over the link).
pub fn hamiltonian(spec: &HamiltonianSpec, grid: Grid1D) -> Result<GridOperator> {
    if !(spec.mass > 0.0) {
        return Err(Error::InvalidParameter("mass must be positive".into()));
    }
    let hbar = spec.units.hbar;
    let kappa = hbar * hbar / (2.0 * spec.mass * grid.dx * grid.dx);
    let mut m = DMatrix::zeros(grid.n, grid.n);
    for j in 0..grid.n {
        let x = grid.x(j);
        m[(j, j)] += Complex64::new(2.0 * kappa + spec.onsite(x)?, 0.0);
        if let Some(k) = grid.neighbour(j, 1) {
            let u = Complex64::from_polar(1.0, spec.link_phase(x, grid.dx)?);
            m[(j, k)] -= kappa * u.conj();
            m[(k, j)] -= kappa * u;
        }
    }
    if grid.boundary == Boundary::Periodic && grid.n == 2 {
        return Err(Error::InvalidParameter("periodic grid too small".into()));
    }
    GridOperator::new(grid, m)
}

/// Eigen-decomposition propagator exp(-i t H / hbar) for self-adjoint H.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    hbar: f64,
    eigen: SymmetricEigen<Complex64, nalgebra::Dyn>,
}

impl ExactPropagator {
    pub fn new(h: &GridOperator, hbar: f64) -> Result<Self> {
        ExactPropagator::with_cap(h, hbar, DENSE_CAP)
    }

    pub fn with_cap(h: &GridOperator, hbar: f64, cap: usize) -> Result<Self> {
        if h.grid.n > cap {
            return Err(Error::GridTooLarge { n: h.grid.n, cap });
        }
        Ok(ExactPropagator {
            hbar,
            eigen: SymmetricEigen::new(h.matrix.clone()),
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen.eigenvalues.iter().copied().collect()
    }

    pub fn apply(&self, psi: &WaveFunction, t: f64) -> WaveFunction {
        let v = &self.eigen.eigenvectors;
        let mut c = v.adjoint() * psi.vector();
        for (k, z) in c.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -self.eigen.eigenvalues[k] * t / self.hbar);
        }
        psi.with_vector(v * c)
    }
}

pub fn evolve_exact(h: &GridOperator, psi0: &WaveFunction, t: f64, hbar: f64) -> Result<WaveFunction> {
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    Ok(ExactPropagator::new(h, hbar)?.apply(psi0, t))
}

enum CnSolver {
    /// Thomas factorization of a (cyclic) tridiagonal matrix.
    Banded {
        sub: Vec<Complex64>,
        cprime: Vec<Complex64>,
        denom: Vec<Complex64>,
        cyclic: Option<(Complex64, Complex64, Complex64, Vec<Complex64>)>,
    },
    Dense(nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
}

fn tridiag_factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = diag.len();
    let mut cp = vec![Complex64::new(0.0, 0.0); n];
    let mut den = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let d = if i == 0 { diag[0] } else { diag[i] - sub[i] * cp[i - 1] };
        if d.norm() < 1e-300 {
            return Err(Error::SingularMatrix);
        }
        den[i] = d;
        if i + 1 < n {
            cp[i] = sup[i] / d;
        }
    }
    Ok((cp, den))
}

fn tridiag_solve(sub: &[Complex64], cp: &[Complex64], den: &[Complex64], r: &[Complex64]) -> Vec<Complex64> {
    let n = r.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        x[i] = if i == 0 { r[0] / den[0] } else { (r[i] - sub[i] * x[i - 1]) / den[i] };
    }
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] = x[i] - cp[i] * x[i + 1];
    }
    x
}

impl CnSolver {
    fn new(m: &DMatrix<Complex64>, boundary: Boundary) -> Result<Self> {
        let n = m.nrows();
        let banded = (0..n).all(|i| {
            (0..n).all(|j| {
                let corner = boundary == Boundary::Periodic && ((i == 0 && j == n - 1) || (i == n - 1 && j == 0));
                i.abs_diff(j) <= 1 || corner || m[(i, j)] == Complex64::new(0.0, 0.0)
            })
        });
        if !banded {
            let lu = m.clone().lu();
            if !lu.is_invertible() {
                return Err(Error::SingularMatrix);
            }
            return Ok(CnSolver::Dense(lu));
        }
        let mut sub: Vec<Complex64> = (0..n).map(|i| if i > 0 { m[(i, i - 1)] } else { Complex64::new(0.0, 0.0) }).collect();
        let sup: Vec<Complex64> = (0..n).map(|i| if i + 1 < n { m[(i, i + 1)] } else { Complex64::new(0.0, 0.0) }).collect();
        let mut diag: Vec<Complex64> = (0..n).map(|i| m[(i, i)]).collect();
        let (alpha, beta) = (m[(n - 1, 0)], m[(0, n - 1)]);
        let cyclic_needed = boundary == Boundary::Periodic && (alpha.norm() > 0.0 || beta.norm() > 0.0);
        if !cyclic_needed {
            let (cp, den) = tridiag_factor(&sub, &diag, &sup)?;
            return Ok(CnSolver::Banded {
                sub,
                cprime: cp,
                denom: den,
                cyclic: None,
            });
        }
        // Sherman-Morrison correction for the corner entries
        let gamma = -diag[0];
        diag[0] -= gamma;
        diag[n - 1] -= alpha * beta / gamma;
        sub[0] = Complex64::new(0.0, 0.0);
        let (cp, den) = tridiag_factor(&sub, &diag, &sup)?;
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[0] = gamma;
        u[n - 1] = alpha;
        let z = tridiag_solve(&sub, &cp, &den, &u);
        Ok(CnSolver::Banded {
            sub,
            cprime: cp,
            denom: den,
            cyclic: Some((gamma, beta, Complex64::new(0.0, 0.0), z)),
        })
    }

    fn solve(&self, r: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        match self {
            CnSolver::Dense(lu) => lu.solve(r).ok_or(Error::SingularMatrix),
            CnSolver::Banded { sub, cprime, denom, cyclic } => {
                let mut x = tridiag_solve(sub, cprime, denom, r.as_slice());
                if let Some((gamma, beta, _, z)) = cyclic {
                    let n = x.len();
                    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
                    for i in 0..n {
                        x[i] -= fact * z[i];
                    }
                }
                Ok(DVector::from_vec(x))
            }
        }
    }
}

/// Crank-Nicolson: (1 + i dt H / 2 hbar) psi_{n+1} = (1 - i dt H / 2 hbar) psi_n.
pub fn evolve_cn(h: &GridOperator, psi0: &WaveFunction, t: f64, steps: usize, hbar: f64) -> Result<WaveFunction> {
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    let dt = t / steps as f64;
    let half = I * (dt / (2.0 * hbar));
    let id = DMatrix::<Complex64>::identity(h.grid.n, h.grid.n);
    let lhs = &id + &h.matrix * half;
    let rhs = &id - &h.matrix * half;
    let solver = CnSolver::new(&lhs, h.grid.boundary)?;
    // the explicit half-step as a sparse product
    let n = h.grid.n;
    let entries: Vec<(usize, usize, Complex64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let z = rhs[(i, j)];
            (z != Complex64::new(0.0, 0.0)).then_some((i, j, z))
        })
        .collect();
    let mut v = psi0.vector();
    let mut r = DVector::<Complex64>::zeros(n);
    for _ in 0..steps {
        r.fill(Complex64::new(0.0, 0.0));
        for &(i, j, z) in &entries {
            r[i] += z * v[j];
        }
        v = solver.solve(&r)?;
    }
    let out = psi0.with_vector(v);
    if out.samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Crank-Nicolson state".into()));
    }
    Ok(out)
}

/// Where the eta integral is cut off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Cutoff {
    /// Multiples of the Fresnel width sqrt(hbar eps / m).
    FresnelWidths(f64),
    /// A fixed distance in x.
    Length(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathIntegralOptions {
    pub cutoff: Cutoff,
    /// Fraction of the cutoff where the cosine taper begins.
    pub taper_from: f64,
}

impl Default for PathIntegralOptions {
    fn default() -> Self {
        PathIntegralOptions {
            cutoff: Cutoff::FresnelWidths(32.0),
            taper_from: 0.5,
        }
    }
}

/// One short-time slice psi(x, t + eps) = (1/A) integral of
/// exp(i m eta^2 / 2 hbar eps) exp(-i eps V(x) / hbar) psi(x + eta) d eta,
/// A = (2 pi i hbar eps / m)^(1/2), with the grid as eta-lattice.
pub fn path_integral_step(spec: &HamiltonianSpec, psi: &WaveFunction, eps: f64, opts: PathIntegralOptions) -> Result<WaveFunction> {
    if spec.vector_potential.is_some() {
        return Err(Error::InvalidParameter("the path-integral slice takes scalar potentials only".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let grid = psi.grid;
    let (hbar, m) = (spec.units.hbar, spec.mass);
    let cutoff = match opts.cutoff {
        Cutoff::FresnelWidths(w) => w * (hbar * eps / m).sqrt(),
        Cutoff::Length(l) => l,
    };
    if !(cutoff > 0.0) || !(0.0..1.0).contains(&opts.taper_from) {
        return Err(Error::InvalidParameter("cutoff must be positive and the taper start in [0, 1)".into()));
    }
    let half = 0.5 * grid.extent();
    if cutoff > half {
        return Err(Error::CutoffTooWide { cutoff, half });
    }
    let phase_step = m * cutoff * grid.dx / (hbar * eps);
    if phase_step > PI {
        return Err(Error::KernelUndersampled { phase_step });
    }
    let kmax = (cutoff / grid.dx).floor() as isize;
    let taper_start = opts.taper_from * cutoff;
    let a = (Complex64::new(0.0, 2.0 * PI * hbar * eps / m)).sqrt();
    let kernel: Vec<Complex64> = (-kmax..=kmax)
        .map(|k| {
            let eta = k as f64 * grid.dx;
            let w = if eta.abs() <= taper_start {
                1.0
            } else {
                let s = (eta.abs() - taper_start) / (cutoff - taper_start);
                (0.5 * PI * s).cos().powi(2)
            };
            Complex64::from_polar(w * grid.dx, m * eta * eta / (2.0 * hbar * eps)) / a
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.n];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for (idx, kv) in kernel.iter().enumerate() {
            if let Some(l) = grid.neighbour(j, idx as isize - kmax) {
                s += kv * psi.samples[l];
            }
        }
        let v = spec.onsite(grid.x(j))?;
        *slot = s * Complex64::from_polar(1.0, -eps * v / hbar);
    }
    WaveFunction::new(grid, out)
}

/// Multiplies by exp(i e Lambda / hbar c).
pub fn gauge_transform(spec: &HamiltonianSpec, lambda: &ScalarField, psi: &WaveFunction) -> Result<WaveFunction> {
    let k = spec.coupling();
    let samples = psi
        .samples
        .iter()
        .enumerate()
        .map(|(j, z)| Ok(z * Complex64::from_polar(1.0, k * lambda.value(&[psi.grid.x(j)])?)))
        .collect::<Result<Vec<_>>>()?;
    WaveFunction::new(psi.grid, samples)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Propagation {
    Exact,
    CrankNicolson { steps: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaugeReport {
    pub l2_gap: f64,
    pub density_gap: f64,
}

/// Compares exp(ieL/hbar c) U_A(t) psi0 with U_{A + dL}(t) exp(ieL/hbar c) psi0.
pub fn gauge_equivalence_check(
    spec: &HamiltonianSpec,
    lambda: &ScalarField,
    psi0: &WaveFunction,
    t: f64,
    how: Propagation,
) -> Result<GaugeReport> {
    let grid = psi0.grid;
    let hbar = spec.units.hbar;
    let evolve = |s: &HamiltonianSpec, psi: &WaveFunction| -> Result<WaveFunction> {
        let h = hamiltonian(s, grid)?;
        match how {
            Propagation::Exact => evolve_exact(&h, psi, t, hbar),
            Propagation::CrankNicolson { steps } => evolve_cn(&h, psi, t, steps, hbar),
        }
    };
    let route1 = gauge_transform(spec, lambda, &evolve(spec, psi0)?)?;
    let route2 = evolve(&spec.gauge_shifted(lambda), &gauge_transform(spec, lambda, psi0)?)?;
    let density_gap = route1
        .density()
        .iter()
        .zip(route2.density())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(GaugeReport {
        l2_gap: route1.distance(&route2),
        density_gap,
    })
}

/// <psi, A psi> / <psi, psi>.
pub fn expectation(op: &GridOperator, psi: &WaveFunction) -> Complex64 {
    psi.inner(&op.apply(psi)) / psi.inner(psi)
}

/// E(A^2) - E(A)^2.
pub fn variance(op: &GridOperator, psi: &WaveFunction) -> Complex64 {
    let e = expectation(op, psi);
    let a = op.apply(psi);
    psi.inner(&op.apply(&a)) / psi.inner(psi) - e * e
}

/// Lowest `k` eigenvalues of a self-adjoint operator, ascending.
pub fn spectrum(h: &GridOperator, k: usize) -> Result<Vec<f64>> {
    if h.grid.n > DENSE_CAP {
        return Err(Error::GridTooLarge { n: h.grid.n, cap: DENSE_CAP });
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h.matrix.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(k);
    Ok(ev)
}

/// Eigenvalues without assuming self-adjointness (Schur form).
pub fn general_eigenvalues(op: &GridOperator) -> Result<Vec<Complex64>> {
    let ev = op.matrix.clone().schur().eigenvalues().ok_or(Error::NotConverged {
        iterations: 0,
        residual: f64::NAN,
    })?;
    Ok(ev.iter().copied().collect())
}

/// Orthonormal eigenbasis (grid inner product) with eigenvalues, ascending.
pub fn eigenbasis(h: &GridOperator) -> Result<(Vec<f64>, Vec<WaveFunction>)> {
    if h.grid.n > DENSE_CAP {
        return Err(Error::GridTooLarge { n: h.grid.n, cap: DENSE_CAP });
    }
    let eig = SymmetricEigen::new(h.matrix.clone());
    let mut order: Vec<usize> = (0..h.grid.n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let s = 1.0 / h.grid.dx.sqrt();
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = order
        .iter()
        .map(|&k| WaveFunction {
            grid: h.grid,
            samples: eig.eigenvectors.column(k).iter().map(|z| z * s).collect(),
        })
        .collect();
    Ok((vals, vecs))
}

/// Position and momentum variances of an analytic wavefunction psi(x), by
/// Gauss-Legendre quadrature on [a, b] with the derivative from jets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Uncertainty {
    pub var_x: f64,
    pub var_p: f64,
    pub product: f64,
    /// product - hbar^2 / 4
    pub slack: f64,
}

pub fn analytic_uncertainty(psi: &ScalarField<Complex64>, a: f64, b: f64, cells: usize, hbar: f64) -> Result<Uncertainty> {
    if psi.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: psi.dim() });
    }
    let (mut n, mut ex, mut ex2, mut ep, mut ep2) = (0.0, 0.0, 0.0, Complex64::new(0.0, 0.0), 0.0);
    for (x, w) in gauss5_nodes(a, b, cells) {
        let j: Jet<Complex64> = psi.jet(&[x], 1)?;
        let (f, df) = (j.value(), j.d(0));
        let rho = f.norm_sqr();
        n += w * rho;
        ex += w * x * rho;
        ex2 += w * x * x * rho;
        ep += w * f.conj() * df * (-I * hbar);
        ep2 += w * hbar * hbar * df.norm_sqr();
    }
    let var_x = ex2 / n - (ex / n).powi(2);
    let var_p = ep2 / n - (ep.re / n).powi(2);
    let product = var_x * var_p;
    Ok(Uncertainty {
        var_x,
        var_p,
        product,
        slack: product - hbar * hbar / 4.0,
    })
}

/// a^2 + b^2 + 2ab cos((e / hbar c) flux).
pub fn ab_probability(a: f64, b: f64, flux: f64, units: &UnitSystem) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidParameter("amplitudes must be non-negative".into()));
    }
    let phase = units.e * flux / (units.hbar * units.c);
    Ok(a * a + b * b + 2.0 * a * b * phase.cos())
}

/// Flux per interference cycle, 2 pi hbar c / e.
pub fn ab_period(units: &UnitSystem) -> f64 {
    2.0 * PI * units.hbar * units.c / units.e
}

/// Measures the flux period of the two-branch probability from a sampled scan:
/// crossings of the mean level are bracketed on the samples and refined by
/// bisection; the period is the mean spacing of every second crossing.
pub fn measure_ab_period(a: f64, b: f64, units: &UnitSystem, flux_max: f64, samples: usize) -> Result<f64> {
    measure_ab_period_on(a, b, units, (0.0, flux_max), samples)
}

/// Same as [`measure_ab_period`] over the flux window `[lo, hi]`.
pub fn measure_ab_period_on(a: f64, b: f64, units: &UnitSystem, window: (f64, f64), samples: usize) -> Result<f64> {
    let (lo_flux, hi_flux) = window;
    if !(hi_flux > lo_flux) || samples == 0 {
        return Err(Error::InvalidParameter("flux window must be non-empty".into()));
    }
    if a == 0.0 || b == 0.0 {
        return Err(Error::InvalidParameter("both branches must contribute".into()));
    }
    let mean = a * a + b * b;
    let f = |x: f64| -> Result<f64> { Ok(ab_probability(a, b, x, units)? - mean) };
    let mut roots = Vec::new();
    let h = (hi_flux - lo_flux) / samples as f64;
    let mut prev = f(lo_flux)?;
    for i in 1..=samples {
        let (lo0, hi0) = (lo_flux + (i - 1) as f64 * h, lo_flux + i as f64 * h);
        let cur = f(hi0)?;
        if prev == 0.0 || prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (lo0, hi0);
            let flo = f(lo)?;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid)?.signum() == flo.signum() && f(mid)? != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    if roots.len() < 3 {
        return Err(Error::InvalidParameter("scan covers less than one period".into()));
    }
    let k = (roots.len() - 1) / 2;
    Ok((roots[2 * k] - roots[0]) / k as f64)
}
