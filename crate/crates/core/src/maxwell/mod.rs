//! Electromagnetism in form language on the (t, x, y, z) chart.
//!
//! Axis 0 is time. The field tensor is F = E_i dx^i ^ dt + (1/c) B, so its
//! stored coefficients are F(0,i) = -E_i, F(2,3) = B_x/c, F(1,3) = -B_y/c,
//! F(1,2) = B_z/c.

mod laplace;
mod poynting;

use serde::Serialize;

use crate::chartcalc::{Chart, Jet, ScalarField};
use crate::error::{Error, Result};
use crate::exterior::{d, interior_const, star4, KForm};

pub use laplace::{laplace_solve, LaplaceProblem, LaplaceSolution};
pub use poynting::{poynting_budget, BoxRegion, PoyntingBudget, PoyntingSpec};

/// Electric and magnetic fields as functions of (t, x, y, z).
#[derive(Clone, Debug)]
pub struct EMField {
    chart: Chart,
    pub e: [ScalarField; 3],
    pub b: [ScalarField; 3],
}

impl EMField {
    pub fn new(e: [ScalarField; 3], b: [ScalarField; 3]) -> Result<Self> {
        for f in e.iter().chain(b.iter()) {
            if f.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: f.dim(),
                });
            }
        }
        Ok(EMField {
            chart: Chart::minkowski(),
            e,
            b,
        })
    }

    pub fn zero() -> Self {
        let z = || ScalarField::zero(4);
        EMField {
            chart: Chart::minkowski(),
            e: [z(), z(), z()],
            b: [z(), z(), z()],
        }
    }

    /// Uniform static fields.
    pub fn uniform(e: [f64; 3], b: [f64; 3]) -> Self {
        let c = |v: f64| ScalarField::constant(4, v);
        EMField {
            chart: Chart::minkowski(),
            e: [c(e[0]), c(e[1]), c(e[2])],
            b: [c(b[0]), c(b[1]), c(b[2])],
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn e_at(&self, p: &[f64]) -> Result<[f64; 3]> {
        Ok([self.e[0].value(p)?, self.e[1].value(p)?, self.e[2].value(p)?])
    }

    pub fn b_at(&self, p: &[f64]) -> Result<[f64; 3]> {
        Ok([self.b[0].value(p)?, self.b[1].value(p)?, self.b[2].value(p)?])
    }
}

/// The potential 1-form A = A0 dt + A1 dx + A2 dy + A3 dz.
#[derive(Clone, Debug)]
pub struct FourPotential {
    form: KForm,
}

impl FourPotential {
    pub fn new(form: KForm) -> Result<Self> {
        if form.grade() != 1 {
            return Err(Error::GradeMismatch(format!(
                "a potential is a 1-form, got grade {}",
                form.grade()
            )));
        }
        if !form.chart().is_minkowski() {
            return Err(Error::InvalidChart("potentials live on the (t, x, y, z) chart".into()));
        }
        Ok(FourPotential { form })
    }

    pub fn from_components(a: [ScalarField; 4]) -> Result<Self> {
        FourPotential::new(KForm::one_form(&Chart::minkowski(), a.to_vec())?)
    }

    pub fn form(&self) -> &KForm {
        &self.form
    }

    pub fn component(&self, mu: usize) -> ScalarField {
        self.form
            .coefficient(&[mu])
            .cloned()
            .unwrap_or_else(|| ScalarField::zero(4))
    }
}

/// Charge density and current as functions of (t, x, y, z).
#[derive(Clone, Debug)]
pub struct SourceDensity {
    pub rho: ScalarField,
    pub j: [ScalarField; 3],
}

impl SourceDensity {
    pub fn vacuum() -> Self {
        let z = || ScalarField::zero(4);
        SourceDensity {
            rho: z(),
            j: [z(), z(), z()],
        }
    }

    pub fn new(rho: ScalarField, j: [ScalarField; 3]) -> Result<Self> {
        for f in std::iter::once(&rho).chain(j.iter()) {
            if f.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: f.dim(),
                });
            }
        }
        Ok(SourceDensity { rho, j })
    }

    /// The current 1-form rho dt + J_x dx + J_y dy + J_z dz.
    pub fn current_form(&self) -> KForm {
        KForm::one_form(
            &Chart::minkowski(),
            vec![
                self.rho.clone(),
                self.j[0].clone(),
                self.j[1].clone(),
                self.j[2].clone(),
            ],
        )
        .expect("four components on the spacetime chart")
    }
}

pub fn field_tensor(a: &FourPotential) -> Result<KForm> {
    d(&a.form)
}

/// Reads E and B back out of a field tensor (c = 1 reading of the spatial block).
pub fn fields_from_tensor(f: &KForm) -> Result<EMField> {
    if f.grade() != 2 || !f.chart().is_minkowski() {
        return Err(Error::GradeMismatch("expected a spacetime 2-form".into()));
    }
    let get = |i: usize, j: usize| {
        f.coefficient(&[i, j])
            .cloned()
            .unwrap_or_else(|| ScalarField::zero(4))
    };
    EMField::new(
        [-get(0, 1), -get(0, 2), -get(0, 3)],
        [get(2, 3), -get(1, 3), get(1, 2)],
    )
}

/// F = E ^ dt + (1/c) B.
pub fn assemble_f(em: &EMField, c: f64) -> Result<KForm> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let inv_c = 1.0 / c;
    KForm::from_terms(
        em.chart(),
        2,
        [
            (vec![1, 0], em.e[0].clone()),
            (vec![2, 0], em.e[1].clone()),
            (vec![3, 0], em.e[2].clone()),
            (vec![2, 3], em.b[0].scale(inv_c)),
            (vec![3, 1], em.b[1].scale(inv_c)),
            (vec![1, 2], em.b[2].scale(inv_c)),
        ],
    )
}

/// Uniform sampling lattice on a 4D box, `points` per axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleLattice {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub points: usize,
}

impl Default for SampleLattice {
    fn default() -> Self {
        SampleLattice {
            lower: [-1.0; 4],
            upper: [1.0; 4],
            points: 5,
        }
    }
}

impl SampleLattice {
    pub fn cube(center: [f64; 4], half_width: f64, points: usize) -> Self {
        SampleLattice {
            lower: center.map(|c| c - half_width),
            upper: center.map(|c| c + half_width),
            points,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = [f64; 4]> + '_ {
        let n = self.points.max(1);
        let coord = move |axis: usize, k: usize| {
            if n == 1 {
                0.5 * (self.lower[axis] + self.upper[axis])
            } else {
                self.lower[axis] + (self.upper[axis] - self.lower[axis]) * k as f64 / (n - 1) as f64
            }
        };
        (0..n.pow(4)).map(move |mut idx| {
            let mut p = [0.0; 4];
            for (axis, slot) in p.iter_mut().enumerate() {
                *slot = coord(axis, idx % n);
                idx /= n;
            }
            p
        })
    }
}

/// Sup-norm of a form's coefficients over a lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub law: String,
    pub sup: f64,
    pub argmax: Vec<f64>,
    pub points: usize,
    pub skipped: usize,
}

fn sup_over(law: &str, w: &KForm, lattice: &SampleLattice) -> Result<ResidualReport> {
    let mut sup = 0.0f64;
    let mut argmax = vec![];
    let mut points = 0;
    let mut skipped = 0;
    for p in lattice.iter() {
        match w.max_abs_at(&p) {
            Ok(v) => {
                points += 1;
                if v > sup || argmax.is_empty() {
                    sup = sup.max(v);
                    argmax = p.to_vec();
                }
            }
            Err(Error::SingularPoint) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(ResidualReport {
        law: law.to_string(),
        sup,
        argmax,
        points,
        skipped,
    })
}

/// sup |dF| over the lattice: the magnetic Gauss law and Faraday's law.
pub fn homogeneous_residual(f: &KForm, lattice: &SampleLattice) -> Result<ResidualReport> {
    sup_over("dF = 0", &d(f)?, lattice)
}

/// Whether the 4 pi of the Gaussian convention multiplies the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceConvention {
    Gaussian,
    Natural,
}

/// sup |d*F - 4 pi *J| over the lattice: Gauss's law and the Ampere-Maxwell law.
pub fn inhomogeneous_residual(
    f: &KForm,
    src: &SourceDensity,
    convention: SourceConvention,
    lattice: &SampleLattice,
) -> Result<ResidualReport> {
    let k = match convention {
        SourceConvention::Gaussian => 4.0 * std::f64::consts::PI,
        SourceConvention::Natural => 1.0,
    };
    let lhs = d(&star4(f)?)?;
    let rhs = star4(&src.current_form())?.scale(k);
    sup_over("d*F = 4 pi *J", &lhs.sub(&rhs)?, lattice)
}

pub(crate) fn check_velocity(v: &[f64; 3], c: f64) -> Result<f64> {
    let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(speed < c) {
        return Err(Error::Superluminal { speed, c });
    }
    Ok(1.0 / (1.0 - (speed / c).powi(2)).sqrt())
}

/// The force 1-form f = -q i_u F with u = gamma (d/dt + v). The temporal
/// coefficient carries the 1/c^2 of the vector-to-form translation.
pub fn lorentz_force(f: &KForm, v: [f64; 3], q: f64, c: f64) -> Result<KForm> {
    let gamma = check_velocity(&v, c)?;
    let u = [gamma, gamma * v[0], gamma * v[1], gamma * v[2]];
    let raw = interior_const(&u, f)?.scale(-q);
    let scale = 1.0 / (c * c);
    let mut terms = Vec::new();
    for (key, coeff) in raw.terms() {
        let g = if key.indices()[0] == 0 {
            coeff.scale(scale)
        } else {
            coeff.clone()
        };
        terms.push((key.indices().to_vec(), g));
    }
    KForm::from_terms(f.chart(), 1, terms)
}

/// Force components (temporal, x, y, z) at a point.
pub fn lorentz_force_at(f: &KForm, v: [f64; 3], q: f64, c: f64, p: &[f64]) -> Result<[f64; 4]> {
    let w = lorentz_force(f, v, q, c)?;
    let mut out = [0.0; 4];
    for (mu, slot) in out.iter_mut().enumerate() {
        *slot = w.component_at(&[mu], p)?;
    }
    Ok(out)
}

/// Vacuum plane wave travelling along +y (sign = +1) or -y (sign = -1).
pub fn plane_wave(e0: f64, sign: f64, c: f64) -> Result<EMField> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter("sign must be +1 or -1".into()));
    }
    let phase = move |x: &[Jet]| (x[2] - x[0] * (sign * c)).sin();
    let z = || ScalarField::zero(4);
    EMField::new(
        [z(), z(), ScalarField::new(4, move |x| phase(x) * e0)],
        [ScalarField::new(4, move |x| phase(x) * (sign * e0)), z(), z()],
    )
}

/// A + d(phi).
pub fn gauge_shift(a: &FourPotential, phi: &ScalarField) -> Result<FourPotential> {
    let dphi = d(&KForm::scalar(&Chart::minkowski(), phi.clone())?)?;
    FourPotential::new(a.form.add(&dphi)?)
}

/// div(A_spatial) + d(A0)/dt at p.
pub fn lorenz_gauge_residual(a: &FourPotential, p: &[f64]) -> Result<f64> {
    let mut s = a.component(0).jet(p, 1)?.d(0);
    for i in 1..4 {
        s += a.component(i).jet(p, 1)?.d(i);
    }
    Ok(s)
}

/// F^{mu nu} F_{mu nu} with indices raised by diag(-1, 1, 1, 1).
pub fn invariant_density(em: &EMField, p: &[f64]) -> Result<f64> {
    let f = assemble_f(em, 1.0)?;
    let eta = [-1.0, 1.0, 1.0, 1.0];
    let mut s = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let low = f.component_at(&[mu, nu], p)?;
            s += eta[mu] * eta[nu] * low * low;
        }
    }
    Ok(s)
}

/// The radial field k |r|^(-3-p) r on a 3D chart, singular at the origin.
pub fn radial_field(k: f64, p: f64) -> [ScalarField; 3] {
    let comp = move |i: usize| {
        ScalarField::new(3, move |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            r2.powf(-0.5 * (3.0 + p)) * x[i] * k
        })
        .with_singular(|q| q.iter().all(|&v| v == 0.0))
    };
    [comp(0), comp(1), comp(2)]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialSample {
    pub radius: f64,
    pub point: [f64; 3],
    pub divergence: f64,
    pub closed_form: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialDivergenceReport {
    pub exponent: f64,
    pub strength: f64,
    pub samples: Vec<RadialSample>,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub max_abs_divergence: f64,
}

/// Divergence of k |r|^(-3-p) r at the given radii against -p k |r|^(-3-p).
pub fn radial_divergence_test(p: f64, k: f64, radii: &[f64]) -> Result<RadialDivergenceReport> {
    let field = radial_field(k, p);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut samples = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        // spread directions over the sphere
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / radii.len().max(1) as f64;
        let rho = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        let point = [r * rho * th.cos(), r * rho * th.sin(), r * z];
        let mut div = 0.0;
        for (a, f) in field.iter().enumerate() {
            div += f.jet(&point, 1)?.d(a);
        }
        let norm = (point[0] * point[0] + point[1] * point[1] + point[2] * point[2]).sqrt();
        let closed = -p * k * norm.powf(-3.0 - p);
        let abs_error = (div - closed).abs();
        let rel_error = if closed != 0.0 { abs_error / closed.abs() } else { abs_error };
        samples.push(RadialSample {
            radius: norm,
            point,
            divergence: div,
            closed_form: closed,
            abs_error,
            rel_error,
        });
    }
    let fold = |f: fn(&RadialSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    Ok(RadialDivergenceReport {
        exponent: p,
        strength: k,
        max_abs_error: fold(|s| s.abs_error),
        max_rel_error: fold(|s| s.rel_error),
        max_abs_divergence: fold(|s| s.divergence.abs()),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4(v: f64) -> ScalarField {
        ScalarField::constant(4, v)
    }

    #[test]
    fn potential_to_fields() {
        let a = FourPotential::from_components([
            ScalarField::coordinate(4, 1),
            c4(0.0),
            c4(0.0),
            c4(0.0),
        ])
        .unwrap();
        let em = fields_from_tensor(&field_tensor(&a).unwrap()).unwrap();
        let p = [0.2, 0.3, -0.1, 0.9];
        assert_eq!(em.e_at(&p).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(em.b_at(&p).unwrap(), [0.0, 0.0, 0.0]);

        let a = FourPotential::from_components([c4(0.0), c4(0.0), ScalarField::coordinate(4, 1), c4(0.0)]).unwrap();
        let em = fields_from_tensor(&field_tensor(&a).unwrap()).unwrap();
        assert_eq!(em.b_at(&p).unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(em.e_at(&p).unwrap(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn electric_field_from_time_dependent_potential() {
        // E = grad A0 - dA/dt
        let a = FourPotential::from_components([
            c4(0.0),
            ScalarField::new(4, |x| x[0] * 3.0),
            c4(0.0),
            c4(0.0),
        ])
        .unwrap();
        let em = fields_from_tensor(&field_tensor(&a).unwrap()).unwrap();
        assert_eq!(em.e_at(&[0.0; 4]).unwrap(), [-3.0, 0.0, 0.0]);
    }

    #[test]
    fn assemble_table() {
        let f = assemble_f(&EMField::uniform([1.0, 0.0, 0.0], [0.0; 3]), 1.0).unwrap();
        let p = [0.0; 4];
        assert_eq!(f.component_at(&[1, 0], &p).unwrap(), 1.0);
        assert_eq!(f.component_at(&[0, 1], &p).unwrap(), -1.0);
        assert_eq!(f.terms().len(), 6);
        let f = assemble_f(&EMField::uniform([0.0; 3], [0.0, 0.0, 1.0]), 1.0).unwrap();
        assert_eq!(f.component_at(&[1, 2], &p).unwrap(), 1.0);
        assert_eq!(f.max_abs_at(&p).unwrap(), 1.0);
        let f = assemble_f(&EMField::zero(), 1.0).unwrap();
        assert_eq!(f.max_abs_at(&p).unwrap(), 0.0);
    }

    #[test]
    fn lorentz_examples() {
        let p = [0.0; 4];
        let f = assemble_f(&EMField::uniform([2.0, 0.0, 0.0], [0.0; 3]), 1.0).unwrap();
        let force = lorentz_force_at(&f, [0.0; 3], 0.5, 1.0, &p).unwrap();
        assert_eq!(force, [0.0, 1.0, 0.0, 0.0]);

        let f = assemble_f(&EMField::uniform([0.0; 3], [0.0, 0.0, 1.5]), 1.0).unwrap();
        let force = lorentz_force_at(&f, [0.0, 0.0, 0.6], 1.0, 1.0, &p).unwrap();
        assert_eq!(force, [0.0; 4]);

        let v1 = 0.6;
        let force = lorentz_force_at(&f, [v1, 0.0, 0.0], 2.0, 1.0, &p).unwrap();
        let gamma = 1.25;
        assert!((force[2] + 2.0 * gamma * v1 * 1.5).abs() < 1e-15);
        assert!(lorentz_force(&f, [1.0, 0.0, 0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn plane_wave_and_invariants() {
        let em = plane_wave(1.3, 1.0, 1.0).unwrap();
        let f = assemble_f(&em, 1.0).unwrap();
        let lat = SampleLattice::default();
        assert!(homogeneous_residual(&f, &lat).unwrap().sup < 1e-10);
        let r = inhomogeneous_residual(&f, &SourceDensity::vacuum(), SourceConvention::Gaussian, &lat).unwrap();
        assert!(r.sup < 1e-10);
        let p = [0.3, 0.1, 0.7, -0.2];
        assert!(invariant_density(&em, &p).unwrap().abs() < 1e-15);
        let e = invariant_density(&EMField::uniform([1.0, 0.0, 0.0], [0.0; 3]), &p).unwrap();
        let b = invariant_density(&EMField::uniform([0.0; 3], [1.0, 0.0, 0.0]), &p).unwrap();
        assert_eq!((e, b), (-2.0, 2.0));
    }

    #[test]
    fn lorenz_examples() {
        let a = FourPotential::from_components([
            ScalarField::coordinate(4, 0),
            ScalarField::coordinate(4, 1),
            c4(0.0),
            c4(0.0),
        ])
        .unwrap();
        assert_eq!(lorenz_gauge_residual(&a, &[0.5, 0.1, 0.2, 0.3]).unwrap(), 2.0);
    }

    #[test]
    fn radial_closed_forms() {
        let r = radial_divergence_test(0.1, 1.0, &[1.0, 2.0]).unwrap();
        assert!((r.samples[0].divergence + 0.1).abs() < 1e-9);
        assert!((r.samples[1].divergence + 0.1 * 2f64.powf(-3.1)).abs() < 1e-9);
        let r = radial_divergence_test(0.0, 1.0, &[0.5, 1.0, 3.0]).unwrap();
        assert!(r.max_abs_divergence < 1e-12);
    }
}
